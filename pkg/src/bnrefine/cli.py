"""Command-line front end.

One executable, six subcommands::

    bnrefine sample      draw complete cases from a network with CPTs
    bnrefine learn       learn a partial structure from cases + existing network
    bnrefine score       score a given structure against cases + existing network
    bnrefine diff        arc-edit diff and its description length, between two networks
    bnrefine refine      full refinement pipeline (learn unless --hp, then substitute)
    bnrefine experiment  sample from a truth network, project, refine a perturbed
                         network, and report arc-level agreement with the truth

Exit status: 0 on success, 1 on usage errors, 2 on data or validation errors.
Every run is deterministic given its flags (seeds included); all file outputs
are written atomically (temp file + rename) and all reports are also
available as JSON via ``--json``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from typing import Sequence

from .data import Dataset, dataset_to_csv, load_dataset, project
from .errors import BnRefineError, DataError, NetworkFormatError, UnknownColumnError
from .graph import (
    DagStructure,
    Network,
    load_network,
    network_to_json,
    structural_diff,
    structure_only_network,
)
from .learn import LearnConfig, learn_partial
from .refine import RefinePlan, refine
from .sampling import SampleSpec, forward_sample
from .scoring import ScorerConfig, total_deviation_bits, total_dl

FORMAT_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit status 2 on usage errors; we reserve 2 for
    data problems, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bnrefine-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_json(path: str, doc: dict) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def _load_net(path: str) -> Network:
    try:
        return load_network(path)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: invalid JSON: {exc}") from exc
    except BnRefineError as exc:
        raise NetworkFormatError(f"{path}: {exc}") from exc


def _load_data(path: str, net: Network) -> Dataset:
    try:
        return load_dataset(path, net.variables)
    except DataError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def _split_names(flag_value: str, flag: str) -> list[str]:
    names = [n.strip() for n in flag_value.split(",") if n.strip()]
    if not names:
        raise UnknownColumnError(f"{flag} must list at least one variable name")
    return names


def _learn_config(args, h_n: DagStructure) -> LearnConfig:
    return LearnConfig(
        scorer=ScorerConfig(
            domain_size=len(h_n.nodes), bits_per_parameter=args.bits_per_param
        ),
        max_parents=args.max_parents,
        max_expansions=args.max_expansions,
        seed_from_existent=getattr(args, "seed_from_existent", False),
    )


def _add_learner_flags(p: argparse.ArgumentParser, with_seed_flag: bool = True) -> None:
    p.add_argument("--bits-per-param", type=float, default=10.0, metavar="D",
                   help="bits charged per table parameter (default 10)")
    p.add_argument("--max-parents", type=int, default=5, metavar="K",
                   help="parent-set cap during search (default 5)")
    p.add_argument("--max-expansions", type=int, default=10000, metavar="E",
                   help="search budget (default 10000)")
    if with_seed_flag:
        p.add_argument("--seed-from-existent", action="store_true",
                       help="start the search from the existing structure "
                            "restricted to the observed variables")


# ---------------------------------------------------------------- sample


def _cmd_sample(args) -> int:
    net = _load_net(args.net)
    sampled = forward_sample(net, SampleSpec(count=args.n, seed=args.seed))
    if args.project:
        sampled = project(sampled, _split_names(args.project, "--project"))
    atomic_write_text(args.out, dataset_to_csv(sampled))
    print(f"wrote {sampled.n_rows} cases x {len(sampled.variables)} columns to {args.out}")
    return 0


# ---------------------------------------------------------------- learn


def _learn_report(result, cfg: LearnConfig) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "arcs": [list(a) for a in result.structure.arcs()],
        "score": result.score.to_dict(),
        "expansions_used": result.expansions_used,
        "converged": result.converged,
        "config": {
            "domain_size": cfg.scorer.domain_size,
            "bits_per_parameter": cfg.scorer.bits_per_parameter,
            "max_parents": cfg.max_parents,
            "max_expansions": cfg.max_expansions,
            "seed_from_existent": cfg.seed_from_existent,
        },
    }


def _cmd_learn(args) -> int:
    net = _load_net(args.net)
    data = _load_data(args.data, net)
    cfg = _learn_config(args, net.structure)
    result = learn_partial(data, net.structure, cfg)

    observed_vars = tuple(data.variables)
    atomic_write_text(
        args.out,
        network_to_json(structure_only_network(observed_vars, result.structure)),
    )
    if args.json:
        _write_json(args.json, _learn_report(result, cfg))

    arcs = result.structure.arcs()
    print(f"learned {len(arcs)} arcs over {len(observed_vars)} observed variables "
          f"({result.expansions_used} steps, converged={result.converged})")
    for p, c in arcs:
        print(f"  {p} -> {c}")
    print()
    print(result.score.to_text_table())
    return 0


# ---------------------------------------------------------------- score


def _cmd_score(args) -> int:
    candidate = _load_net(args.structure)
    net = _load_net(args.net)
    data = _load_data(args.data, net)
    cfg = ScorerConfig(domain_size=len(net.structure.nodes),
                       bits_per_parameter=args.bits_per_param)
    breakdown = total_dl(candidate.structure, data, net.structure, cfg)
    if args.json:
        _write_json(args.json, {
            "format_version": FORMAT_VERSION,
            "domain_size": cfg.domain_size,
            "bits_per_parameter": cfg.bits_per_parameter,
            "score": breakdown.to_dict(),
        })
    print(breakdown.to_text_table())
    return 0


# ---------------------------------------------------------------- diff


def _cmd_diff(args) -> int:
    existent = _load_net(args.existent)
    proposed = _load_net(args.proposed)
    diff = structural_diff(existent.structure, proposed.structure)
    cfg = ScorerConfig(domain_size=len(existent.structure.nodes))
    bits = total_deviation_bits(diff, cfg)

    if args.json:
        _write_json(args.json, {
            "format_version": FORMAT_VERSION,
            "domain_size": cfg.domain_size,
            "reversed_arcs": [list(a) for a in diff.reversed_arcs],
            "additional_arcs": [list(a) for a in diff.additional_arcs],
            "missing_arcs": [list(a) for a in diff.missing_arcs],
            "per_node": {
                n: {"reversed": c.reversed, "additional": c.additional,
                    "missing": c.missing}
                for n, c in diff.per_node.items() if c.total
            },
            "description_length_bits": bits,
        })

    print(f"reversed:   {diff.n_reversed}  {[f'{p}->{c}' for p, c in diff.reversed_arcs]}")
    print(f"additional: {diff.n_additional}  {[f'{p}->{c}' for p, c in diff.additional_arcs]}")
    print(f"missing:    {diff.n_missing}  {[f'{p}->{c}' for p, c in diff.missing_arcs]}")
    print(f"description length: {bits:.6f} bits")
    return 0


# ---------------------------------------------------------------- refine


def _plan_report(plan: RefinePlan, observed: Sequence[str]) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "observed": list(observed),
        "units": [
            {
                "members": list(u.members),
                "benefit_bits": u.benefit,
                "new_parents": {x: sorted(u.new_parents[x]) for x in u.members},
                "applied": i in plan.applied,
                "skipped_for_cycle": i in plan.skipped_for_cycle,
            }
            for i, u in enumerate(plan.units)
        ],
        "applied": list(plan.applied),
        "skipped_for_cycle": list(plan.skipped_for_cycle),
        "score_delta_bits": plan.score_delta,
        "expansions_used": plan.expansions_used,
        "converged": plan.converged,
        "refined_arcs": [list(a) for a in plan.result.arcs()],
    }


def _print_plan_summary(h_n: DagStructure, plan: RefinePlan) -> None:
    print(f"{len(plan.units)} replacement unit(s); "
          f"applied {len(plan.applied)}, saving {plan.score_delta:.3f} bits")
    for i, unit in enumerate(plan.units):
        status = "applied" if i in plan.applied else (
            "skipped (cycle)" if i in plan.skipped_for_cycle else "not applied")
        print(f"  unit {{{', '.join(unit.members)}}}: "
              f"benefit {unit.benefit:.3f} bits -- {status}")
    changed = [n for n in plan.result.nodes
               if plan.result.parents[n] != h_n.parents[n]]
    if changed:
        print("parent-set changes:")
        for n in sorted(changed):
            old = ", ".join(sorted(h_n.parents[n])) or "(none)"
            new = ", ".join(sorted(plan.result.parents[n])) or "(none)"
            print(f"  {n}: {old}  ->  {new}")
    else:
        print("no structural change")


def _cmd_refine(args) -> int:
    net = _load_net(args.net)
    data = _load_data(args.data, net)
    cfg = _learn_config(args, net.structure)

    if args.hp:
        h_p = _load_net(args.hp).structure
    else:
        h_p = learn_partial(data, net.structure, cfg).structure

    plan = refine(net.structure, h_p, data, cfg)
    atomic_write_text(
        args.out, network_to_json(structure_only_network(net.variables, plan.result))
    )
    if args.json:
        _write_json(args.json, _plan_report(plan, data.column_names))
    _print_plan_summary(net.structure, plan)
    return 0


# ---------------------------------------------------------------- experiment


@dataclasses.dataclass(frozen=True)
class ExperimentSpec:
    """Desk-scale recovery experiment: sample, project, refine, compare."""

    truth_path: str
    existent_path: str
    observed: tuple[str, ...]
    n_samples: int
    seed: int
    bits_per_parameter: float = 10.0
    max_parents: int = 5
    max_expansions: int = 10000
    seed_from_existent: bool = False


def run_experiment(spec: ExperimentSpec) -> tuple[dict, Network, RefinePlan]:
    """Run the end-to-end protocol and return (report, refined network, plan)."""
    truth = _load_net(spec.truth_path)
    existent = _load_net(spec.existent_path)
    if set(truth.structure.nodes) != set(existent.structure.nodes):
        raise NetworkFormatError(
            "truth and existent networks must cover the same variables; they differ on "
            f"{sorted(set(truth.structure.nodes) ^ set(existent.structure.nodes))}"
        )
    unknown = [n for n in spec.observed if n not in set(truth.structure.nodes)]
    if unknown:
        raise UnknownColumnError(f"--observed names unknown variables {unknown}")

    complete = forward_sample(truth, SampleSpec(count=spec.n_samples, seed=spec.seed))
    observed_data = project(complete, spec.observed)

    cfg = LearnConfig(
        scorer=ScorerConfig(
            domain_size=len(existent.structure.nodes),
            bits_per_parameter=spec.bits_per_parameter,
        ),
        max_parents=spec.max_parents,
        max_expansions=spec.max_expansions,
        seed_from_existent=spec.seed_from_existent,
    )
    learned = learn_partial(observed_data, existent.structure, cfg)
    plan = refine(existent.structure, learned.structure, observed_data, cfg)

    truth_obs = truth.structure.restrict(spec.observed)
    existent_obs = existent.structure.restrict(spec.observed)
    refined_obs = plan.result.restrict(spec.observed)
    before = structural_diff(truth_obs, existent_obs)
    after = structural_diff(truth_obs, refined_obs)

    def _edit_summary(d) -> dict:
        return {
            "reversed": d.n_reversed,
            "additional": d.n_additional,
            "missing": d.n_missing,
            "arcs_reversed": [list(a) for a in d.reversed_arcs],
            "arcs_only_in_truth": [list(a) for a in d.additional_arcs],
            "arcs_not_in_truth": [list(a) for a in d.missing_arcs],
        }

    report = {
        "format_version": FORMAT_VERSION,
        "observed": list(spec.observed),
        "n_samples": spec.n_samples,
        "seed": spec.seed,
        "learned_arcs": [list(a) for a in learned.structure.arcs()],
        "plan": _plan_report(plan, spec.observed),
        "existent_vs_truth_on_observed": _edit_summary(before),
        "refined_vs_truth_on_observed": _edit_summary(after),
        "identical_on_observed": after.is_empty(),
        "score_delta_bits": plan.score_delta,
    }
    refined_net = structure_only_network(existent.variables, plan.result)
    return report, refined_net, plan


def _cmd_experiment(args) -> int:
    spec = ExperimentSpec(
        truth_path=args.truth,
        existent_path=args.existent,
        observed=tuple(_split_names(args.observed, "--observed")),
        n_samples=args.n,
        seed=args.seed,
        bits_per_parameter=args.bits_per_param,
        max_parents=args.max_parents,
        max_expansions=args.max_expansions,
        seed_from_existent=args.seed_from_existent,
    )
    report, refined_net, plan = run_experiment(spec)
    if args.out:
        atomic_write_text(args.out, network_to_json(refined_net))
    if args.json:
        _write_json(args.json, report)

    before = report["existent_vs_truth_on_observed"]
    after = report["refined_vs_truth_on_observed"]
    print(f"observed variables: {', '.join(report['observed'])}")
    print(f"edits vs truth before refinement: reversed={before['reversed']} "
          f"additional={before['additional']} missing={before['missing']}")
    print(f"edits vs truth after refinement:  reversed={after['reversed']} "
          f"additional={after['additional']} missing={after['missing']}")
    print(f"identical to truth on observed subset: {report['identical_on_observed']}")
    print(f"bits saved: {plan.score_delta:.3f}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bnrefine",
                     description="Refine a categorical Bayesian network structure "
                                 "from new, partially-specified case data.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("sample", help="draw complete cases from a network with CPTs")
    p.add_argument("--net", required=True, help="network JSON (with cpts)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--n", type=int, required=True, help="number of cases")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--project", metavar="A,B,C",
                   help="keep only these columns (applied after sampling)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("learn", help="learn a partial structure over the data columns")
    p.add_argument("--net", required=True, help="existing network JSON")
    p.add_argument("--data", required=True, help="case CSV")
    p.add_argument("--out", required=True, help="output path for the learned structure JSON")
    p.add_argument("--json", help="also write a machine-readable score report here")
    _add_learner_flags(p)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("score", help="score a candidate structure")
    p.add_argument("structure", help="candidate structure JSON (arcs over the data columns)")
    p.add_argument("--net", required=True, help="existing network JSON")
    p.add_argument("--data", required=True, help="case CSV")
    p.add_argument("--json", help="write the breakdown as JSON here")
    p.add_argument("--bits-per-param", type=float, default=10.0, metavar="D")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("diff", help="arc edits recovering the first network from the second")
    p.add_argument("existent", help="reference network JSON (full domain)")
    p.add_argument("proposed", help="proposed network JSON (node subset)")
    p.add_argument("--json", help="write the diff as JSON here")
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("refine", help="learn (unless --hp) and substitute parent sets")
    p.add_argument("--net", required=True, help="existing network JSON")
    p.add_argument("--data", required=True, help="case CSV")
    p.add_argument("--hp", help="precomputed partial structure JSON (skips learning)")
    p.add_argument("--out", required=True, help="output path for the refined network JSON")
    p.add_argument("--json", help="write the refinement plan as JSON here")
    _add_learner_flags(p)
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("experiment",
                       help="sample from a truth network, project, refine, compare")
    p.add_argument("--truth", required=True, help="ground-truth network JSON (with cpts)")
    p.add_argument("--existent", required=True, help="perturbed network JSON to refine")
    p.add_argument("--observed", required=True, metavar="A,B,C",
                   help="observed variable names")
    p.add_argument("--n", type=int, required=True, help="number of cases to sample")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--out", help="output path for the refined network JSON")
    p.add_argument("--json", help="write the experiment report here")
    _add_learner_flags(p)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        # out-of-range flag values (e.g. --n 0) are usage errors
        print(f"bnrefine {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except BnRefineError as exc:
        print(f"bnrefine {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bnrefine {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
