"""Command-line front end.

Exit codes: 0 when the computation succeeded and the command's mathematical
check (if any) passed; 1 on input errors or failed checks/verifications;
2 on budget exhaustion. CW_BUDGET sets the default element budget.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass

from .algebra import FiniteAlgebra, load
from .catalog import enumerate_si
from .centrality import center, upper_central_series
from .congruence import congruence_lattice, si_check
from .errors import DEFAULT_BUDGET, AlgebraFormatError, BudgetError, VerificationError
from .factorization import direct_factorization
from .formulas import (
    PsiConfig,
    build_phi,
    decompose_commutator,
    render_theta,
    theta_semantic_check,
    verify_dpsc,
)
from .free_terms import empirical_M, find_maltsev, variety_bounds
from .terms import parse_term, render_term

COMMANDS = (
    "info",
    "con",
    "center",
    "ucs",
    "maltsev",
    "si",
    "factor",
    "hypotheses",
    "phi",
    "mbound",
    "decompose",
    "dpsc",
    "theta",
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str
    budget: int
    max_power: int
    max_size: int
    max_arity: int
    n_bound: int | None
    seed: int
    json_output: bool

    def to_json(self) -> dict:
        return {
            "budget": self.budget,
            "max_power": self.max_power,
            "max_size": self.max_size,
            "max_arity": self.max_arity,
            "n_bound": self.n_bound,
            "seed": self.seed,
        }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cwb",
        description="Finite universal-algebra workbench over operation tables.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("file", help="algebra file (JSON)")
    parser.add_argument(
        "term",
        nargs="?",
        default=None,
        help="prefix-notation term for `decompose` (variables x1..xn, z)",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--budget", type=int, default=None, help="element budget")
    parser.add_argument("--max-power", type=int, default=2)
    parser.add_argument("--max-size", type=int, default=8)
    parser.add_argument("--max-arity", type=int, default=3)
    parser.add_argument("--n-bound", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    return parser


def _psi_config(alg: FiniteAlgebra, cfg: RunConfig) -> PsiConfig:
    return PsiConfig(
        bounds=variety_bounds(alg, cfg.max_arity, cfg.budget, cfg.n_bound)
    )


def cmd_info(alg, cfg):
    result = {
        "name": alg.name,
        "size": alg.size,
        "operations": [{"name": n, "arity": a} for n, a in alg.signature],
    }
    text = [f"{alg.name}: size {alg.size}"] + [
        f"  {n}/{a} (table length {alg.size**a})" for n, a in alg.signature
    ]
    return result, True, text


def cmd_con(alg, cfg):
    lattice = congruence_lattice(alg, cfg.budget)
    result = {
        "count": len(lattice),
        "congruences": [p.to_json() for p in lattice],
    }
    text = [f"{len(lattice)} congruences"] + [f"  {p}" for p in lattice]
    return result, True, text


def cmd_center(alg, cfg):
    z = center(alg, cfg.budget)
    result = {"partition": z.to_json(), "is_full": z.is_one()}
    return result, True, [f"center: {z}"]


def cmd_ucs(alg, cfg):
    ucs = upper_central_series(alg, cfg.budget)
    result = ucs.to_json()
    if ucs.nilpotent:
        text = [f"nilpotent of class {ucs.nilpotence_class}"]
    else:
        text = [f"not nilpotent (stalls at zeta_{ucs.stall_index})"]
    text += [f"  zeta_{i} = {p}" for i, p in enumerate(ucs.series)]
    return result, True, text


def cmd_maltsev(alg, cfg):
    res = find_maltsev(alg, cfg.budget)
    result = {"status": res.status, "complete": res.complete}
    if res.witness is not None:
        result["term"] = render_term(res.witness.term, alg.signature)
        result["checked_instances"] = list(res.witness.checked_instances)
        text = [f"Mal'tsev term: {result['term']}"]
    else:
        text = [f"no Mal'tsev term ({res.status})"]
    return result, res.witness is not None, text


def cmd_si(alg, cfg):
    witness = si_check(alg)
    if witness is None:
        return (
            {"subdirectly_irreducible": False},
            False,
            ["not subdirectly irreducible"],
        )
    result = {
        "subdirectly_irreducible": True,
        "monolith": witness.monolith.to_json(),
        "critical_pairs": [list(p) for p in witness.critical_pairs],
    }
    text = [
        "subdirectly irreducible",
        f"  monolith: {witness.monolith}",
        f"  critical pairs: {witness.critical_pairs}",
    ]
    return result, True, text


def cmd_factor(alg, cfg):
    f = direct_factorization(alg, cfg.budget)
    text = [
        f"factors: {', '.join(f'{x.name} (size {x.size})' for x in f.factors)}",
        f"prime-power flags: {list(f.prime_power)}",
    ]
    return f.to_json(), True, text


def cmd_hypotheses(alg, cfg):
    ucs = upper_central_series(alg, cfg.budget)
    factorization = direct_factorization(alg, cfg.budget)
    maltsev = find_maltsev(alg, cfg.budget)
    nilpotent = ucs.nilpotent
    prime_power = factorization.all_prime_power
    permutable = maltsev.witness is not None
    ok = nilpotent and prime_power and permutable
    result = {
        "nilpotent": {
            "holds": nilpotent,
            "class": ucs.nilpotence_class,
            "stall_index": ucs.stall_index,
        },
        "prime_power_product": {
            "holds": prime_power,
            "factor_sizes": list(factorization.sizes),
            "flags": list(factorization.prime_power),
        },
        "congruence_permutable": {
            "holds": permutable,
            "maltsev_status": maltsev.status,
        },
        "pass": ok,
    }
    text = [
        f"nilpotent: {'yes, class ' + str(ucs.nilpotence_class) if nilpotent else 'NO'}",
        f"product of prime-power-order factors: {'yes' if prime_power else 'NO'} "
        f"(sizes {list(factorization.sizes)})",
        f"congruence permutable (Mal'tsev term): {'yes' if permutable else 'NO'}",
        f"hypotheses {'PASS' if ok else 'FAIL'}",
    ]
    return result, ok, text


def cmd_phi(alg, cfg):
    phi = build_phi(alg, cfg.budget)
    return phi.to_json(), True, [f"Phi built with |T| = {len(phi)} binary terms"]


def cmd_mbound(alg, cfg):
    res = empirical_M(alg, cfg.max_arity, cfg.budget)
    result = {
        "m_emp": res.m_emp,
        "status": res.status,
        "max_arity": res.max_arity,
        "per_arity": [
            {
                "nvars": s.nvars,
                "complete": s.complete,
                "nontrivial_count": s.nontrivial_count,
            }
            for s in res.per_arity
        ],
    }
    text = [f"M_emp = {res.m_emp} ({res.status} through arity {res.max_arity})"]
    return result, True, text


def cmd_decompose(alg, cfg, term_text):
    if term_text is None:
        raise AlgebraFormatError("decompose requires a term argument")
    nvars = max((int(m) for m in re.findall(r"\bx([1-9][0-9]*)\b", term_text)), default=0)
    w = parse_term(term_text, alg.signature)
    dec = decompose_commutator(alg, w, nvars)
    result = dec.to_json()
    result["verified"] = True
    text = [
        f"base: {result['base']}",
        *(f"component {c['subset']}: {c['term']}" for c in result["components"]),
        "reconstruction verified",
    ]
    return result, True, text


def cmd_dpsc(alg, cfg):
    entries = enumerate_si(alg, cfg.max_power, cfg.max_size, cfg.budget)
    psi_cfg = _psi_config(alg, cfg)
    report = verify_dpsc(alg, entries, psi_cfg, cfg.budget)
    algebras = {e.algebra.name: e.algebra for e in entries}
    result = report.to_json(algebras)
    result["catalog"] = [e.to_json() for e in entries]
    text = [
        f"catalog: {len(entries)} SI members "
        f"(max_power {cfg.max_power}, max_size {cfg.max_size})",
        f"N = {report.n_bound}, instances: {len(report.instances)}, "
        f"max witness complexity: {report.max_witness_complexity}",
        f"dpsc {'PASS' if report.passed else 'FAIL'}",
    ]
    if report.warning:
        text.append(f"warning: {report.warning}")
    return result, report.passed, text


def cmd_theta(alg, cfg):
    phi = build_phi(alg, cfg.budget)
    psi_cfg = _psi_config(alg, cfg)
    rendering = render_theta(phi, psi_cfg)
    verdict = theta_semantic_check(alg, phi, psi_cfg, cfg.budget)
    result = {
        "sentence": rendering.text,
        "phi_disjuncts": rendering.phi_disjuncts,
        "sigma_placeholder": rendering.sigma_placeholder,
        "n_bound": psi_cfg.n_bound,
        "verdict": "unknown" if verdict is None else verdict,
    }
    text = rendering.text.splitlines() + [
        "",
        f"semantic check on {alg.name}: {result['verdict']}",
    ]
    return result, verdict is True, text


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    budget = args.budget
    if budget is None:
        env = os.environ.get("CW_BUDGET", "")
        budget = int(env) if env else DEFAULT_BUDGET
    if budget <= 0:
        print("error: budget must be positive", file=sys.stderr)
        return 1
    if args.n_bound is not None and args.n_bound < 2:
        print("error: --n-bound must be >= 2", file=sys.stderr)
        return 1
    cfg = RunConfig(
        command=args.command,
        input_path=args.file,
        budget=budget,
        max_power=args.max_power,
        max_size=args.max_size,
        max_arity=args.max_arity,
        n_bound=args.n_bound,
        seed=args.seed,
        json_output=args.json,
    )
    try:
        alg = load(args.file)
    except (AlgebraFormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        if args.command == "decompose":
            result, ok, text = cmd_decompose(alg, cfg, args.term)
        else:
            handler = globals()[f"cmd_{args.command}"]
            result, ok, text = handler(alg, cfg)
    except BudgetError as e:
        print(f"budget exhausted: {e}", file=sys.stderr)
        return 2
    except (AlgebraFormatError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return 1
    if cfg.json_output:
        doc = {
            "command": cfg.command,
            "input": cfg.input_path,
            "config": cfg.to_json(),
            "ok": ok,
            "result": result,
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for line in text:
            print(line)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
