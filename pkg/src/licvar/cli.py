"""Command-line interface: ``licvar <command> ...``.

Exit codes: 0 success or compatible, 1 incompatibility found, 2 only
unknowns (or an unknown license), 3 and above operational errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from licvar import kb as kbmod
from licvar.compat import check
from licvar.depgraph import load_index, resolve
from licvar.errors import LicvarError, NotFoundError, UnknownLicenseError
from licvar.fingerprint import DEFAULT_K, DEFAULT_W, fingerprint, matching_score
from licvar.gateway import Gateway, MockReasoner, RemoteConfig, RemoteReasoner
from licvar.model import LicenseId, TermVector
from licvar.parser import ParserConfig, parse, parse_baseline
from licvar.pipeline import ScanConfig, exit_code, report_render, scan
from licvar.textproc import diff_sentences, segment

log = logging.getLogger("licvar")

EXIT_OK, EXIT_INCOMPATIBLE, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise NotFoundError(f"cannot read {path}: {exc.strerror}") from None


def _load_kb(args: argparse.Namespace) -> kbmod.KnowledgeBase:
    return kbmod.load(args.kb)


def _gateway(args: argparse.Namespace, kb: kbmod.KnowledgeBase) -> Gateway:
    if args.backend == "mock":
        return Gateway(MockReasoner(kb), kb.default_embedder())
    cfg = RemoteConfig.load(args.config)
    if not cfg.endpoint:
        raise LicvarError("the remote backend needs an endpoint (config file or LICVAR_ENDPOINT)")
    return Gateway(RemoteReasoner(cfg), kb.default_embedder())


def _parser_config(args: argparse.Namespace) -> ParserConfig:
    return ParserConfig(similarity_threshold=args.threshold, reasoning_backend=args.backend)


# ------------------------------------------------------------------ commands


def cmd_compare(args: argparse.Namespace) -> int:
    a = fingerprint(_read(args.first), args.k, args.w)
    b = fingerprint(_read(args.second), args.k, args.w)
    score = matching_score(a, b)
    if args.json:
        print(json.dumps({"score": score, "k": args.k, "w": args.w,
                          "signatures": [len(a), len(b)]}))
    else:
        print(f"{score:.4f}")
    return EXIT_OK


def _standard_text(ref: str, args: argparse.Namespace) -> str:
    if Path(ref).is_file():
        return _read(ref)
    lic = _load_kb(args).get(ref)
    if lic is None:
        raise NotFoundError(f"{ref!r} is neither a file nor a knowledge-base license")
    return lic.full_text


def cmd_diff(args: argparse.Namespace) -> int:
    cand = segment(_read(args.candidate))
    std = segment(_standard_text(args.standard, args))
    d = diff_sentences(cand, std)
    if args.json:
        print(json.dumps({"matched": d.matched, "candidate_only": d.candidate_only,
                          "standard_only": d.standard_only}))
        return EXIT_OK
    print(f"{len(d.matched)} matched, {len(d.candidate_only)} added, "
          f"{len(d.standard_only)} removed")
    for i in d.candidate_only:
        print(f"+ [{i}] {cand[i].text}")
    for j in d.standard_only:
        print(f"- [{j}] {std[j].text}")
    return EXIT_OK


def cmd_parse(args: argparse.Namespace) -> int:
    kb = _load_kb(args)
    text = _read(args.file)
    gw = _gateway(args, kb)
    if args.baseline:
        result = parse_baseline(text, _parser_config(args), gw, kb)
    else:
        result = parse(text, kb, _parser_config(args), gw)
    if args.json:
        print(json.dumps(result.to_json_dict(), indent=2))
        return EXIT_OK
    match = (f"{result.matched_id} ({result.best_similarity:.3f})" if result.matched_standard
             else f"none (best {result.best_similarity:.3f})")
    print(f"matched standard: {match}")
    print(f"sentences: {result.sentence_count} total, {result.reused_sentence_count} reused, "
          f"{result.model_sentence_count} sent to the model; model calls: {result.model_calls}")
    for kind, value in result.term_vector.values.items():
        value_text = "None" if value is None else (", ".join(value) if isinstance(value, tuple)
                                                   else str(value))
        print(f"  {kind.value:30s} {value_text:30s} {result.term_vector.provenance[kind].value}")
    for c in result.conflicts:
        print(f"conflict {c.kind.value}: reused {c.reused}, inferred {c.inferred} -> {c.resolved}")
    for note in result.notes:
        print(f"note: {note}")
    return EXIT_OK


def _license_arg(ref: str, kb: kbmod.KnowledgeBase, args: argparse.Namespace
                 ) -> tuple[LicenseId, TermVector]:
    lic = kb.get(ref)
    if lic is not None:
        return lic.id, lic.term_vector
    if Path(ref).is_file():
        result = parse(_read(ref), kb, _parser_config(args), _gateway(args, kb))
        if result.matched_standard and result.term_vector.same_terms(
                kb[result.matched_id].term_vector):
            return kb[result.matched_id].id, result.term_vector
        return LicenseId.of(f"LicenseRef-{Path(ref).stem}"), result.term_vector
    raise UnknownLicenseError(f"{ref!r} is neither a knowledge-base license nor a file")


def cmd_compat(args: argparse.Namespace) -> int:
    kb = _load_kb(args)
    up = _license_arg(args.upstream, kb, args)
    down = _license_arg(args.downstream, kb, args)
    verdict = check(up, down)
    if args.json:
        print(json.dumps({"upstream": str(up[0]), "downstream": str(down[0]),
                          **verdict.to_json_dict()}, indent=2))
    else:
        print(f"{up[0]} -> {down[0]}: {verdict.label} "
              f"({', '.join(sorted(k.value for k in verdict.kinds))})")
        if args.explain:
            for step in verdict.trace:
                print(f"  {step}")
    return EXIT_OK if verdict.compatible else EXIT_INCOMPATIBLE


def cmd_deps(args: argparse.Namespace) -> int:
    tree = resolve(args.name, args.version, load_index(args.index))
    print(json.dumps(tree.to_json_dict(), indent=2) if args.json else tree.render())
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    kb = _load_kb(args)
    index = load_index(args.index)
    cfg = ScanConfig(parser=_parser_config(args), max_workers=args.workers)
    report = scan(args.name, args.version, index, kb, _gateway(args, kb), cfg)
    sys.stdout.write(report_render(report, "json" if args.json else "human", args.explain))
    return exit_code(report)


def cmd_kb_validate(args: argparse.Namespace) -> int:
    kb = _load_kb(args)
    sentences = sum(len(lic.sentences) for lic in kb.licenses.values())
    print(f"ok: {len(kb)} licenses, {sentences} annotated sentences")
    return EXIT_OK


def cmd_kb_build(args: argparse.Namespace) -> int:
    kb = kbmod.build(args.kb or kbmod.bundled_path())
    print(f"rebuilt embeddings for {len(kb)} licenses")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="licvar", description="License variant analysis.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def kb_opt(p: argparse.ArgumentParser) -> None:
        p.add_argument("--kb", default=None, help="knowledge base directory (default: bundled)")

    def model_opts(p: argparse.ArgumentParser) -> None:
        kb_opt(p)
        p.add_argument("--backend", choices=["mock", "remote"], default="mock")
        p.add_argument("--config", default=None, help="INI file with a [licvar] section")
        p.add_argument("--threshold", type=float, default=ParserConfig.similarity_threshold)

    p = sub.add_parser("compare", help="Winnowing similarity of two texts")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("-k", type=int, default=DEFAULT_K)
    p.add_argument("-w", type=int, default=DEFAULT_W)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("diff", help="sentence diff against a standard license")
    p.add_argument("candidate")
    p.add_argument("standard", help="file or knowledge-base license id")
    kb_opt(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("parse", help="parse a license text into a term vector")
    p.add_argument("file")
    model_opts(p)
    p.add_argument("--baseline", action="store_true", help="classify every sentence")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("compat", help="compatibility of an upstream and a downstream license")
    p.add_argument("upstream", help="knowledge-base license id or license file")
    p.add_argument("downstream", help="knowledge-base license id or license file")
    model_opts(p)
    p.add_argument("--explain", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compat)

    p = sub.add_parser("deps", help="resolve the dependency tree of a release")
    p.add_argument("name")
    p.add_argument("version")
    p.add_argument("--index", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_deps)

    p = sub.add_parser("scan", help="check a release's dependencies for license conflicts")
    p.add_argument("name")
    p.add_argument("version")
    p.add_argument("--index", required=True)
    model_opts(p)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.add_argument("--explain", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("kb", help="knowledge base maintenance")
    kb_sub = p.add_subparsers(dest="kb_command", required=True)
    q = kb_sub.add_parser("validate", help="load and check a knowledge base")
    kb_opt(q)
    q.set_defaults(func=cmd_kb_validate)
    q = kb_sub.add_parser("build", help="recompute the embeddings of a knowledge base")
    kb_opt(q)
    q.set_defaults(func=cmd_kb_build)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UnknownLicenseError as exc:
        print(f"licvar: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (LicvarError, ValueError) as exc:
        print(f"licvar: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
