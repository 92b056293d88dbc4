"""Command-line front door: provision tags, run sessions and campaigns,
replay manifests, evaluate attacks over transcript files, print the cost
accounting.

Conventions: machine-readable summaries go to stdout as one JSON object,
logs to stderr; transcripts and ground truth are JSONL files, ground truth
always in a sibling file (never inline) so attack tooling can only be fed
public data by construction.  Every run with a file output writes a
manifest next to it; ``tagauth --manifest FILE`` replays that run.

Exit codes: 0 success; 1 protocol rejection in single-session mode;
2 usage or I/O errors.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .attacks import AttackVerdict
from .simulator import (
    CampaignConfig,
    Forcing,
    KeyMode,
    NonceMode,
    NonceStream,
    Outcome,
    Protocol,
    cost_accounting,
    evaluate_attack,
    ground_truth_from_dict,
    ground_truth_to_dict,
    iter_campaign,
    load_tags,
    provision,
    run_session,
    save_tags,
    transcript_from_dict,
    transcript_to_dict,
)
from .store import Store
from .word96 import to_hex

log = logging.getLogger("tagauth")

MANIFEST_FORMAT = "rfid-manifest/1"

VARIANTS = [p.value for p in Protocol]


class UsageError(Exception):
    pass


def _tags_path(opts: dict) -> str:
    return opts.get("tags") or f"{opts['store']}.tags"


def _manifest_path(output: str) -> Path:
    return Path(output).with_suffix(".manifest.json")


def _ground_truth_path(output: str) -> Path:
    return Path(output).with_suffix(".gt.jsonl")


def _write_manifest(subcommand: str, opts: dict, output: str) -> None:
    payload = {"format": MANIFEST_FORMAT, "subcommand": subcommand, "args": opts}
    with open(_manifest_path(output), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _print_summary(summary: dict) -> None:
    print(json.dumps(summary, indent=2))


def _load_world(opts: dict):
    store = Store.load(opts["store"])
    tags = load_tags(_tags_path(opts))
    return store, tags


def _save_world(opts: dict, store: Store, tags: dict) -> None:
    store.save(opts["store"])
    save_tags(tags, _tags_path(opts))


def _read_jsonl(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _jsonl_line(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


# -- subcommands ---------------------------------------------------------------

def cmd_provision(opts: dict) -> int:
    protocol = Protocol(opts["variant"])
    tags, store = provision(opts["count"], protocol, opts["seed"])
    store.save(opts["store"])
    save_tags(tags, _tags_path(opts))
    _write_manifest("provision", opts, opts["store"])
    _print_summary({
        "subcommand": "provision",
        "variant": protocol.value,
        "count": opts["count"],
        "seed": opts["seed"],
        "store": opts["store"],
        "tags_file": _tags_path(opts),
        "labels": sorted(tags),
    })
    return 0


def _forcing_from_session_opts(opts: dict) -> Forcing:
    forcing = Forcing(drop_d=bool(opts.get("drop_d")))
    replay_file = opts.get("replay")
    if replay_file:
        lines = _read_jsonl(replay_file)
        if not lines:
            raise UsageError(f"replay file {replay_file} holds no transcripts")
        captured = transcript_from_dict(lines[-1])
        if opts.get("replay_mode", "abc") == "d":
            if captured.d is None:
                raise UsageError(f"replay file {replay_file}: last transcript has no D")
            forcing.replay_d = captured
        else:
            if captured.a is None:
                raise UsageError(f"replay file {replay_file}: last transcript has no A||B||C")
            forcing.replay_abc = captured
    return forcing


def cmd_session(opts: dict) -> int:
    store, tags = _load_world(opts)
    label = opts["tag"]
    if label not in tags:
        raise UsageError(f"unknown tag {label!r} in {_tags_path(opts)}")
    tag = tags[label]
    if opts.get("variant") and opts["variant"] != tag.protocol.value:
        raise UsageError(
            f"tag {label!r} was provisioned as {tag.protocol.value}, not {opts['variant']}")
    forcing = _forcing_from_session_opts(opts)
    rng = NonceStream(opts["seed"])
    transcript, truth = run_session(tag, store, forcing, rng,
                                    session_index=opts.get("session_index", 0))
    _save_world(opts, store, tags)
    output = opts.get("output")
    if output:
        with open(output, "a", encoding="utf-8") as fh:
            fh.write(_jsonl_line(transcript_to_dict(transcript)))
        with open(_ground_truth_path(output), "a", encoding="utf-8") as fh:
            fh.write(_jsonl_line(ground_truth_to_dict(truth)))
        _write_manifest("session-run", opts, output)
    _print_summary({
        "subcommand": "session-run",
        "tag": label,
        "outcome": transcript.outcome.value,
        "transcript": transcript_to_dict(transcript),
    })
    rejected = transcript.outcome in (
        Outcome.READER_REJECTED, Outcome.TAG_REJECTED, Outcome.LOOKUP_FAILED)
    return 1 if rejected else 0


def cmd_campaign(opts: dict) -> int:
    store, tags = _load_world(opts)
    label = opts.get("tag")
    if label is None:
        if len(tags) != 1:
            raise UsageError("--tag is required when the store holds more than one tag")
        label = next(iter(tags))
    if label not in tags:
        raise UsageError(f"unknown tag {label!r} in {_tags_path(opts)}")
    tag = tags[label]
    config = CampaignConfig(
        protocol=tag.protocol,
        sessions=opts["sessions"],
        seed=opts["seed"],
        nonce_mode=NonceMode(opts.get("forcing", "random")),
        key_mode=KeyMode(opts.get("force_keys", "as-stored")),
        drop_d_rate=opts.get("drop_d_rate", 0.0),
    )
    output = opts["output"]
    outcomes: dict[str, int] = {}
    bits_total = 0
    count = 0
    with open(output, "w", encoding="utf-8") as t_fh, \
            open(_ground_truth_path(output), "w", encoding="utf-8") as g_fh:
        for transcript, truth in iter_campaign(tag, store, config):
            t_fh.write(_jsonl_line(transcript_to_dict(transcript)))
            g_fh.write(_jsonl_line(ground_truth_to_dict(truth)))
            outcomes[transcript.outcome.value] = outcomes.get(transcript.outcome.value, 0) + 1
            bits_total += transcript.bit_cost
            count += 1
    _save_world(opts, store, tags)
    _write_manifest("campaign", opts, output)
    log.info("campaign wrote %d transcripts to %s", count, output)
    _print_summary({
        "subcommand": "campaign",
        "tag": label,
        "protocol": tag.protocol.value,
        "sessions": config.sessions,
        "seed": config.seed,
        "forcing": {"nonces": config.nonce_mode.value, "keys": config.key_mode.value},
        "drop_d_rate": config.drop_d_rate,
        "outcomes": dict(sorted(outcomes.items())),
        "bits_total": bits_total,
        "output": output,
        "ground_truth": str(_ground_truth_path(output)),
    })
    return 0


def _verdict_to_dict(kind: str, record: dict) -> dict:
    verdict: AttackVerdict = record["verdict"]
    out: dict = {"session": record["session"], "fired": verdict.fired}
    if verdict.recovered_id is not None:
        out["recovered_id"] = (verdict.recovered_id if kind == "sasi"
                               else to_hex(verdict.recovered_id))
    if verdict.recovered_state is not None:
        rs = verdict.recovered_state
        out["recovered_state"] = {
            "k1_star": to_hex(rs.k1_star), "k2_star": to_hex(rs.k2_star),
            "n1": to_hex(rs.n1), "n2": to_hex(rs.n2), "n3": to_hex(rs.n3),
            "n1p": to_hex(rs.n1p), "n2p": to_hex(rs.n2p),
            "next_ids": to_hex(rs.next_ids),
        }
    if record["prediction_confirmed"] is not None:
        out["prediction_confirmed"] = record["prediction_confirmed"]
    if verdict.ground_truth_match is not None:
        out["ground_truth_match"] = verdict.ground_truth_match
    return out


def cmd_attack(opts: dict) -> int:
    kind = opts["kind"]
    transcripts = [transcript_from_dict(d) for d in _read_jsonl(opts["input"])]
    truths = None
    if opts.get("ground_truth"):
        truths = [ground_truth_from_dict(d) for d in _read_jsonl(opts["ground_truth"])]
    records, summary = evaluate_attack(kind, transcripts, truths)
    output = opts.get("output")
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(_jsonl_line(_verdict_to_dict(kind, record)))
        _write_manifest("attack", opts, output)
    _print_summary(summary)
    return 0


def cmd_bench(opts: dict) -> int:
    if opts.get("what", "cost") != "cost":
        raise UsageError(f"unknown bench target {opts.get('what')!r}")
    _print_summary(cost_accounting(opts["variant"]))
    return 0


# -- argument parsing ----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tagauth",
        description="Ultralightweight RFID mutual-authentication workbench "
                    "(SASI, Gossamer, modified Gossamer).")
    parser.add_argument("--manifest", metavar="FILE",
                        help="replay a previous run from its manifest")
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("provision", help="create tags and their backend store")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--tags", help="tag-state file (default: <store>.tags)")

    p = sub.add_parser("session", help="single-session operations")
    session_sub = p.add_subparsers(dest="session_command")
    run = session_sub.add_parser("run", help="run one authentication session")
    run.add_argument("--variant", choices=VARIANTS,
                     help="checked against the tag's provisioned protocol")
    run.add_argument("--tag", required=True)
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--store", required=True)
    run.add_argument("--tags")
    run.add_argument("--drop-d", action="store_true", dest="drop_d",
                     help="lose the final message in transit")
    run.add_argument("--replay", metavar="FILE",
                     help="replay the last transcript in FILE instead of honest traffic")
    run.add_argument("--replay-mode", choices=["abc", "d"], default="abc",
                     dest="replay_mode",
                     help="replay the challenge to the tag (abc) or the response "
                          "to the reader (d)")
    run.add_argument("--session-index", type=int, default=0, dest="session_index")
    run.add_argument("--output", help="append the transcript (JSONL) here")

    p = sub.add_parser("campaign", help="run many sessions against one tag")
    p.add_argument("--sessions", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--tags")
    p.add_argument("--tag", help="label; may be omitted for a one-tag store")
    p.add_argument("--output", required=True)
    p.add_argument("--forcing", choices=[m.value for m in NonceMode], default="random",
                   help="nonce forcing")
    p.add_argument("--force-keys", choices=[m.value for m in KeyMode],
                   default="as-stored", dest="force_keys")
    p.add_argument("--drop-d-rate", type=float, default=0.0, dest="drop_d_rate")

    p = sub.add_parser("attack", help="evaluate a passive attack over transcripts")
    p.add_argument("kind", choices=["sasi", "gossamer-1", "gossamer-2"])
    p.add_argument("--input", required=True, help="transcript JSONL")
    p.add_argument("--ground-truth", dest="ground_truth",
                   help="ground-truth JSONL for scoring")
    p.add_argument("--output", help="write per-trial verdicts (JSONL) here")

    p = sub.add_parser("bench", help="print protocol cost accounting")
    p.add_argument("what", choices=["cost"])
    p.add_argument("--variant", choices=VARIANTS, default="gossamer")

    return parser


_RUNNERS = {
    "provision": cmd_provision,
    "session-run": cmd_session,
    "campaign": cmd_campaign,
    "attack": cmd_attack,
    "bench": cmd_bench,
}


def _opts_from_namespace(ns: argparse.Namespace) -> tuple[str, dict]:
    opts = {k: v for k, v in vars(ns).items()
            if k not in ("subcommand", "session_command", "manifest") and v is not None}
    name = ns.subcommand
    if name == "session":
        if getattr(ns, "session_command", None) != "run":
            raise UsageError("usage: tagauth session run ...")
        name = "session-run"
    if name == "bench":
        opts["what"] = opts.pop("what", "cost")
    return name, opts


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.manifest:
            with open(ns.manifest, encoding="utf-8") as fh:
                payload = json.load(fh)
            if payload.get("format") != MANIFEST_FORMAT:
                raise UsageError(f"{ns.manifest}: not a {MANIFEST_FORMAT} file")
            name, opts = payload["subcommand"], payload["args"]
            if name not in _RUNNERS:
                raise UsageError(f"{ns.manifest}: unknown subcommand {name!r}")
        else:
            if not ns.subcommand:
                parser.print_usage(sys.stderr)
                return 2
            name, opts = _opts_from_namespace(ns)
        return _RUNNERS[name](opts)
    except UsageError as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s: %s", exc.filename or "I/O error", exc.strerror or exc)
        return 2
    except ValueError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
