"""Command-line front end: ``qnpsynth synth | verify | equiv``.

Exit codes: 0 positive verdict, 1 counterexample, 2 input or parse error,
3 budget exhausted.
"""

from __future__ import annotations

import datetime
import json
import sys
import time

import click

from .abstraction import abstract_pre_formula
from .base import make_base
from .errors import BudgetExceeded, FormulaError, InputError, ParseError
from .fol.equivalence import semantically_equivalent
from .fol.printer import to_sexpr
from .fol.syntax import conj, implies
from .io import (
    load_abstraction,
    load_config,
    load_domain,
    load_instance,
    load_policy,
    load_signature,
    parse_formula_file,
    read_text,
)
from .synthesis import report_data, report_text, synthesize_necessary, synthesize_sufficient
from .verify import (
    DEFAULT_MAX_CHECKS,
    Budgets,
    check_guarantee_valid,
    check_invariant,
    check_membership,
    check_soundness_direct,
    run_policy,
)
from .strips import DEFAULT_MAX_STATES

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
MODES = ("guarantee", "sound", "member", "invariant", "policy")


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _guarded(fn):
    """Turn library errors into messages and exit codes."""
    try:
        return fn()
    except _Fail as e:
        click.echo(f"error: {e}", err=True)
        return e.code
    except (ParseError, InputError, FormulaError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_INPUT
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_INPUT
    except BudgetExceeded as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_BUDGET


def _stamp():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _emit(text, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _render(data, fmt, text_lines, timestamp):
    if fmt == "json":
        if timestamp:
            data = {"generated": _stamp(), **data}
        return json.dumps(data, indent=2, sort_keys=False) + "\n"
    header = [f"; generated {_stamp()}"] if timestamp else []
    return "\n".join(header + text_lines) + "\n"


def _base_from(base_kind, amend_star, config):
    amended = []
    if config:
        cfg = load_config(config)["base"]
        base_kind = base_kind or cfg["kind"]
        amended = cfg["amended_star"]
    if amend_star:
        amended = amended + [p.strip() for p in amend_star.split(",") if p.strip()]
    return make_base(base_kind or "general", tuple(dict.fromkeys(amended)))


def _check_amended(base, domain):
    for p in getattr(base, "amended", ()):
        if p not in domain.signature.closure_enabled:
            raise InputError(f"--amend-star {p}: predicate has no closure in the domain")


def _common(fn):
    options = [
        click.option("--base", "base_kind", type=click.Choice(["general", "trivial"]), default=None,
                     help="synthesis base (default general)"),
        click.option("--amend-star", default="", help="comma-separated predicates with the amended p* S-term"),
        click.option("--config", type=click.Path(exists=True, dir_okay=False), help="TOML file with a [base] table"),
        click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text"),
        click.option("--no-timestamp", is_flag=True, help="omit timestamp and timing for reproducible output"),
        click.option("-o", "--output", type=click.Path(dir_okay=False), help="write the report here"),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(package_name="qnpsynth")
def main():
    """Synthesize and check first-order guarantees for QNP abstractions."""


# -- synth --------------------------------------------------------------------------------------


def compare_guarantees(suff, nec, sig, bound):
    """Bounded equivalence of each action's necessary and sufficient formulas."""
    out = {}
    for entry in suff:
        name = entry.action.name
        v = semantically_equivalent(entry.formula, nec.formula(name), sig, bound)
        out[name] = f"equivalent up to {bound} objects" if v else f"differ: {v.describe()}"
    return out


@main.command()
@click.argument("domain_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("abstraction_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--bound", type=int, default=3, show_default=True,
              help="universe bound for the necessary-vs-sufficient comparison (0 skips it)")
@_common
def synth(domain_file, abstraction_file, bound, base_kind, amend_star, config, fmt, no_timestamp, output):
    """Write sufficient and necessary guarantees for every abstract action."""

    def run():
        d = load_domain(domain_file)
        q = load_abstraction(abstraction_file, d.signature)
        base = _base_from(base_kind, amend_star, config)
        _check_amended(base, d)
        suff = synthesize_sufficient(q, d, base)
        nec = synthesize_necessary(q, d, base)
        comparisons = None
        if bound > 0:
            if bound < len(d.signature.constants):
                raise InputError(f"--bound {bound} is below the number of constants")
            comparisons = compare_guarantees(suff, nec, d.signature, bound)
        if fmt == "json":
            text = _render(report_data(suff, nec, comparisons), fmt, None, not no_timestamp)
        else:
            body = report_text(suff, nec, comparisons).rstrip("\n").split("\n")
            text = _render(None, fmt, body, not no_timestamp)
        _emit(text, output)
        return EXIT_OK

    sys.exit(_guarded(run))


# -- verify ---------------------------------------------------------------------------------------


def default_invariant(q, suff):
    """The conjunction over abstract actions of ``Pre(abs) => Phi``."""
    return conj(*(implies(abstract_pre_formula(e.action, q.features), e.formula) for e in suff))


@main.command()
@click.argument("domain_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("abstraction_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("instance_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(MODES), required=True)
@click.option("--scope", type=click.Choice(["reachable", "all-states"]), default="reachable", show_default=True,
              help="states examined by --mode guarantee")
@click.option("--max-states", type=int, default=DEFAULT_MAX_STATES, show_default=True)
@click.option("--max-checks", type=int, default=DEFAULT_MAX_CHECKS, show_default=True)
@click.option("--all-different", is_flag=True, help="ground schemas with pairwise distinct arguments only")
@click.option("--policy", "policy_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--invariant", "invariant_file", type=click.Path(exists=True, dir_okay=False),
              help="closed formula to test (default: Pre(abs) => Phi for every abstract action)")
@click.option("--chooser", type=click.Choice(["first", "all"]), default="first", show_default=True)
@click.option("--max-steps", type=int, default=1000, show_default=True)
@_common
def verify(domain_file, abstraction_file, instance_file, mode, scope, max_states, max_checks, all_different,
           policy_file, invariant_file, chooser, max_steps, base_kind, amend_star, config, fmt, no_timestamp,
           output):
    """Check an abstraction against one instance."""

    def run():
        d = load_domain(domain_file)
        q = load_abstraction(abstraction_file, d.signature)
        inst = load_instance(instance_file, d)
        budgets = Budgets(max_states, max_checks)
        base = _base_from(base_kind, amend_star, config)
        _check_amended(base, d)
        start = time.perf_counter()
        extra = {}
        if mode == "guarantee":
            result = check_guarantee_valid(synthesize_sufficient(q, d, base), inst, scope, budgets,
                                           all_different=all_different)
        elif mode == "sound":
            result = check_soundness_direct(q, inst, budgets, all_different=all_different)
        elif mode == "member":
            result = check_membership(q, synthesize_sufficient(q, d, base), inst, budgets, all_different)
        elif mode == "invariant":
            if invariant_file:
                f = parse_formula_file(read_text(invariant_file), d.signature, invariant_file)
            else:
                f = default_invariant(q, synthesize_sufficient(q, d, base))
            extra["formula"] = to_sexpr(f)
            result = check_invariant(f, inst, budgets, all_different=all_different)
        else:
            if not policy_file:
                raise _Fail(EXIT_INPUT, "--mode policy needs --policy")
            pol = load_policy(policy_file, q)
            result = run_policy(pol, q, inst, max_steps, chooser, budgets, all_different)
            extra["chooser"] = chooser
        elapsed = time.perf_counter() - start
        data = {
            "command": "verify",
            "mode": mode,
            "domain": d.name,
            "abstraction": q.name,
            "instance": inst.name,
            **extra,
            "result": result.to_dict(),
        }
        if not no_timestamp:
            data["seconds"] = round(elapsed, 3)
        lines = [f"; verify --mode {mode}: {inst.name} against {q.name}"]
        lines += [("PASS " if result else "FAIL ") + result.describe()]
        lines += [f"; {k}: {v}" for k, v in result.stats.items() if not isinstance(v, (list, dict))]
        if not no_timestamp:
            lines.append(f"; seconds: {elapsed:.3f}")
        _emit(_render(data, fmt, lines, not no_timestamp), output)
        return EXIT_OK if result else EXIT_COUNTEREXAMPLE

    sys.exit(_guarded(run))


# -- equiv ------------------------------------------------------------------------------------------


@main.command()
@click.argument("formula_1", type=click.Path(exists=True, dir_okay=False))
@click.argument("formula_2", type=click.Path(exists=True, dir_okay=False))
@click.option("--signature", "signature_file", type=click.Path(exists=True, dir_okay=False), required=True,
              help="signature or domain file shared by both formulas")
@click.option("--bound", type=int, default=3, show_default=True, help="largest universe size enumerated")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--no-timestamp", is_flag=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def equiv(formula_1, formula_2, signature_file, bound, fmt, no_timestamp, output):
    """Compare two formulas on every structure up to --bound objects."""

    def run():
        sig = load_signature(signature_file)
        f1 = parse_formula_file(read_text(formula_1), sig, formula_1)
        f2 = parse_formula_file(read_text(formula_2), sig, formula_2)
        if bound < max(1, len(sig.constants)):
            raise InputError(f"--bound {bound} is below the number of constants ({len(sig.constants)})")
        v = semantically_equivalent(f1, f2, sig, bound)
        data = {"command": "equiv", "equivalent": v.equivalent, "bound": bound,
                "structures_checked": v.structures_checked}
        if not v:
            data["counterexample"] = [" ".join(a) for a in v.counterexample.atoms()]
            data["universe"] = list(v.counterexample.universe)
            data["binding"] = v.binding
        lines = [("PASS " if v else "FAIL ") + v.describe()]
        _emit(_render(data, fmt, lines, not no_timestamp), output)
        return EXIT_OK if v else EXIT_COUNTEREXAMPLE

    sys.exit(_guarded(run))


if __name__ == "__main__":
    main()
