"""The full audit pipeline and its JSON report."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path
from typing import Optional

import numpy as np

from . import oracle
from .audit import (
    NoDecomposition,
    NotBewleyAgents,
    NotBewleySocial,
    check_corollary1,
    check_corollary2,
    check_prop1,
    check_prop2,
    check_prop3_liberalism,
    check_theorem1_condition,
    decompose_utility,
    diversity_check,
)
from .lp import EPS_FEAS
from .model import Profile, parse_act, validate_profile
from .preference import EPS_DEC, compare
from .witness import DiversityFails, InvalidViolation, VerificationFailed, forge

FORMAT_VERSION = 1
FIXTURE_ENV = "VARBEWLEY_FIXTURES"

EXIT_CLEAN = 0
EXIT_INVALID = 2
EXIT_CONDITION = 3
EXIT_CONVERSE = 4
EXIT_VERIFICATION = 5


def resolve_path(name: str) -> Path:
    """A path as given, else a file in the fixture directory."""
    p = Path(name)
    if p.exists():
        return p
    base = os.environ.get(FIXTURE_ENV)
    candidates = [Path(base) / name] if base else []
    candidates.append(Path(str(files("varbewley.fixtures").joinpath(p.name))))
    for c in candidates:
        if c.exists():
            return c
    raise FileNotFoundError(name)


def load_document(name: str) -> dict:
    with open(resolve_path(name), encoding="utf-8") as fh:
        return json.load(fh)


def load_profile(name: str) -> Profile:
    return validate_profile(load_document(name))


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _num(x: float) -> str:
    return f"{x:.6g}"


def _prior_text(p) -> str:
    return "(" + ", ".join(_num(w) for w in p) + ")"


def restate_violation(profile: Profile, v: oracle.OracleViolation) -> str:
    """Human-readable form of the violated social inequality at the social argmin."""
    p = v.social_prior.weights
    support = np.flatnonzero(p > EPS_FEAS)
    c_text = f"c0{_prior_text(p)}"
    if support.size == 1:
        s = profile.states[support[0]]
        lhs = f"u0(f({s})) + {c_text}"
        rhs = f"u0(g({s}))"
    else:
        lhs = f"E_p[u0(f)] + {c_text}"
        rhs = "E_p[u0(g)]"
    return f"{lhs} = {_num(v.social_value_f)} < {_num(v.social_value_g)} = {rhs}"


def _named_pairs(profile: Profile) -> list:
    acts = list(profile.acts)
    return [(a, b) for a in acts for b in acts if a is not b]


def _act_comparisons(profile: Profile, eps_dec: float) -> list:
    out = []
    acts = list(profile.acts)
    for x in range(len(acts)):
        for y in range(x + 1, len(acts)):
            f, g = acts[x], acts[y]
            entry = {"f": f.name, "g": g.name, "preferences": []}
            for k in range(profile.n_agents + 1):
                pref = profile.preference(k)
                cmp = compare(pref.utility, pref.perception, f, g, eps_dec)
                entry["preferences"].append({"agent": k, **cmp.as_dict()})
            out.append(entry)
    return out


@dataclass
class AuditResult:
    report: dict
    exit_code: int

    def text(self) -> str:
        return self.report["summary"]


def _optional_check(fn, profile, decomp, eps_dec):
    try:
        return fn(profile, decomp, eps_dec).as_dict()
    except (NotBewleySocial, NotBewleyAgents) as exc:
        return {"applicable": False, "reason": str(exc)}


def run_audit(profile: Profile, seed: int = 0, resolution: Optional[int] = None,
              samples: int = 10_000, eps_dec: float = EPS_DEC) -> AuditResult:
    """Decomposition, condition sweep, subclass checks, witnesses and the sampled oracle."""
    r = resolution or oracle.default_resolution(profile.n_states)
    summary = []
    report = {
        "format_version": FORMAT_VERSION,
        "summary": "",
        "profile": {"states": list(profile.states), "outcome_dim": profile.outcome_dim,
                    "n_agents": profile.n_agents},
        "seeds": {"pareto_audit": seed, "liberalism_audit": seed},
        "tolerances": {"eps_feas": EPS_FEAS, "eps_dec": eps_dec, "grid_resolution": r,
                       "samples": samples},
    }
    verification_failed = False
    engine_violation = False

    diversity = diversity_check(profile)
    report["diversity"] = diversity.as_dict()
    decomp = decompose_utility(profile)
    report["decomposition"] = {"found": not isinstance(decomp, NoDecomposition), **decomp.as_dict()}

    if isinstance(decomp, NoDecomposition):
        engine_violation = True
        summary.append(f"no utilitarian decomposition: {decomp.reason} ({decomp.detail})")
        summary.append("Pareto cannot hold; the oracle looks for a constant-act violation")
        report["condition"] = None
    else:
        alpha = ", ".join(_num(a) for a in decomp.weights)
        summary.append(f"decomposition: alpha = ({alpha}), beta = {_num(decomp.shift)}")
        cond = check_theorem1_condition(profile, decomp, eps_dec)
        report["condition"] = cond.as_dict()
        report["checks"] = {
            "corollary1": check_corollary1(profile, decomp, eps_dec).as_dict(),
            "corollary2": _optional_check(check_corollary2, profile, decomp, eps_dec),
            "prop1_bewley_social": _optional_check(check_prop1, profile, decomp, eps_dec),
            "prop2_bewley_agents": _optional_check(check_prop2, profile, decomp, eps_dec),
            "prop3_liberalism": check_prop3_liberalism(profile, decomp, eps_dec).as_dict(),
        }
        if cond.satisfied:
            summary.append("perception condition: satisfied")
            summary.append("no constructive witness available; converse may still fail")
        else:
            engine_violation = True
            v = cond.violation
            summary.append(f"perception condition: violated for agent {v.agent} at prior "
                           f"{_prior_text(v.prior.weights)} ({v.kind}, gap "
                           f"{'inf' if v.kind == 'infinite' else _num(v.gap)})")
            try:
                w = forge(profile, decomp, v, eps_dec)
                report["witness"] = w.as_dict()
                margins = ", ".join(_num(m) for m in w.margins)
                summary.append(f"witness: verified margins ({margins}) (individuals..., society)")
            except DiversityFails as exc:
                report["witness"] = {"error": str(exc)}
                summary.append(f"witness: not constructed ({exc})")
            except (InvalidViolation, VerificationFailed) as exc:
                verification_failed = True
                report["witness"] = {"error": str(exc)}
                summary.append(f"witness: verification failed ({exc})")

    if profile.acts:
        report["act_comparisons"] = _act_comparisons(profile, eps_dec)

    pareto = oracle.sampled_pareto_audit(profile, samples, seed, r, inject=_named_pairs(profile),
                                         eps_dec=eps_dec)
    oracle_doc = pareto.as_dict()
    for entry, v in zip(oracle_doc["violations"], pareto.violations):
        entry["restated"] = restate_violation(profile, v)
    report["pareto_audit"] = oracle_doc
    if diversity.independent:
        lib = oracle.sampled_liberalism_audit(profile, samples, seed, r, eps_dec)
        report["liberalism_audit"] = lib.as_dict()
    if pareto.violations:
        first = pareto.violations[0]
        summary.append(f"sampled Pareto audit: {len(pareto.violations)} verified violation(s); "
                       f"first ({first.stratum}): {restate_violation(profile, first)}")
    else:
        summary.append(f"sampled Pareto audit: clean over {pareto.counts['pairs']} pairs")

    converse = bool(pareto.violations) and not engine_violation
    report["converse_failure"] = converse
    if converse:
        summary.append("converse failure: condition holds yet Pareto fails")

    if verification_failed:
        code = EXIT_VERIFICATION
    elif engine_violation:
        code = EXIT_CONDITION
    elif converse:
        code = EXIT_CONVERSE
    else:
        code = EXIT_CLEAN
    report["exit_code"] = code
    report["summary"] = "\n".join(summary)
    return AuditResult(report, code)


def dominance_report(profile: Profile, agent: int, acts: list, eps_dec: float = EPS_DEC) -> dict:
    pref = profile.preference(agent)
    pairs = []
    for x in range(len(acts)):
        for y in range(x + 1, len(acts)):
            f, g = acts[x], acts[y]
            cmp = compare(pref.utility, pref.perception, f, g, eps_dec)
            pairs.append({"f": f.name, "g": g.name, **cmp.as_dict()})
    return {"format_version": FORMAT_VERSION, "agent": agent, "eps_dec": eps_dec, "pairs": pairs}


def parse_acts(doc: dict, profile: Profile) -> list:
    if not isinstance(doc, dict) or not isinstance(doc.get("acts"), list):
        raise ValueError("acts document must be an object with an 'acts' list")
    return [parse_act(a, profile.n_states, profile.outcome_dim, default_name=f"act{j}")
            for j, a in enumerate(doc["acts"])]

