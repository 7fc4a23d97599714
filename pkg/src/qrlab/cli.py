"""Command-line interface.

Commands: eval (formula over one field), report (full statistics for one
group and connection set), sweep (a family across field sizes, CSV/JSON out),
verify (relation suites).  Exit codes: 0 all good, 2 on any relation
violation, 1 on usage errors.
"""

from __future__ import annotations

import csv
import json
import sys

import click
import numpy as np

from . import defform, fourier, quasi, reglab
from .errors import QrlabError
from .ffield import parse_field_literal
from .grp import parse_group_literal


def _parse_modulus(text):
    if not text:
        return None
    return tuple(int(x) for x in text.split(","))


def _parse_params(pairs):
    out = {}
    for p in pairs:
        name, _, val = p.partition("=")
        if not val:
            raise click.UsageError(f"bad --param {p!r}; expected name=value")
        out[name.strip()] = int(val)
    return out


@click.group()
def cli():
    """Quasirandomness statistics for definable subsets of finite groups."""


@cli.command("eval")
@click.option("--field", "field_text", required=True,
              help="Field literal, e.g. 13 or 3^2.")
@click.option("--modulus", default=None,
              help="Comma-separated modulus coefficients (constant first).")
@click.option("--formula", "formula_text", required=True)
@click.option("--param", "params", multiple=True,
              help="Parameter assignment name=int, repeatable.")
@click.option("--json", "as_json", is_flag=True, help="Emit the RLE JSON form.")
def eval_cmd(field_text, modulus, formula_text, params, as_json):
    """Evaluates a formula over one finite field and prints the solution set."""
    param_map = _parse_params(params)
    spec = parse_field_literal(field_text, modulus=_parse_modulus(modulus))
    f = defform.parse(formula_text, param_vars=tuple(param_map))
    ds = defform.evaluate(f, spec, params=param_map)
    if as_json:
        out = ds.to_rle()
        out["size"] = ds.size
        out["complexity"] = f.complexity
        out["formula"] = f.serialize()
        click.echo(json.dumps(out))
        return
    click.echo(f"field: {spec} (modulus {spec.modulus}, hash {spec.order_hash})")
    click.echo(f"formula: {f.serialize()} (complexity {f.complexity}, "
               f"arity {ds.arity})")
    click.echo(f"size: {ds.size} of {spec.q ** ds.arity}")
    if ds.membership.size <= 4096:
        click.echo("members: " + ",".join(map(str, np.flatnonzero(ds.membership))))


def _connection_from_formula(g, spec, formula):
    if g.label == "additive":
        return reglab._additive_connection(g, spec, formula)
    if g.label == "multiplicative":
        return reglab._multiplicative_connection(g, spec, formula)
    if g.label == "sl2":
        return reglab._trace_connection(g, spec, formula)
    raise click.UsageError(f"no connection-set rule for group label {g.label!r}")


@cli.command("report")
@click.option("--group", "group_text", required=True,
              help="Group literal: add:Q, mul:Q, or sl2:Q.")
@click.option("--set-formula", "formula_text", required=True,
              help="One-variable formula selecting the connection set "
                   "(applied to the trace for sl2 groups).")
@click.option("--subgroup-max-index", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", default=None, help="Write JSON to a file.")
def report_cmd(group_text, formula_text, subgroup_max_index, seed, out_path):
    """Full quasirandomness report for one group and definable connection set."""
    g = parse_group_literal(group_text)
    spec = g.field
    f = defform.parse(formula_text)
    if len(f.free_vars) != 1:
        raise click.UsageError("--set-formula must have exactly one free variable")
    d = _connection_from_formula(g, spec, f)
    rep = quasi.verify_gowers_relations(quasi.cayley_bipartite(g, d), seed=seed)
    outcome = reglab.subgroup_search(g, d, subgroup_max_index)
    fe = reglab._translate_fourier_eps(g, d, outcome.subgroup, seed=seed)
    doc = rep.to_json_dict()
    doc.update({
        "group": group_text,
        "set_formula": f.serialize(),
        "set_complexity": f.complexity,
        "seed": seed,
        "modulus": list(spec.modulus),
        "order_hash": spec.order_hash,
        "h_index": outcome.index,
        "h_members": [int(x) for x in outcome.subgroup.element_ids()],
        "max_coset_eps1": {"num": outcome.max_coset_eps1.numerator,
                           "den": outcome.max_coset_eps1.denominator},
        "fourier_eps": {"value": fe, "method": "spectral"},
    })
    text = json.dumps(doc, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    click.echo(text)
    if not rep.all_relations_hold():
        sys.exit(2)


@cli.command("sweep")
@click.option("--family", "family_name", required=True,
              type=click.Choice(sorted(reglab.builtin_families())))
@click.option("--qs", required=True, help="Comma-separated field sizes.")
@click.option("--max-index", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "csv_path", default=None, help="CSV output path.")
@click.option("--json-out", "json_path", default=None, help="JSON output path.")
def sweep_cmd(family_name, qs, max_index, seed, csv_path, json_path):
    """Sweeps a built-in family over field sizes and fits decay exponents."""
    try:
        q_list = [int(x) for x in qs.split(",") if x.strip()]
    except ValueError:
        raise click.UsageError(f"bad --qs {qs!r}; expected comma-separated ints")
    fam = reglab.builtin_families()[family_name]
    result = reglab.sweep(fam, q_list, max_index=max_index, seed=seed)
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            csv.writer(fh).writerows(result.to_csv_rows())
    if json_path:
        with open(json_path, "w") as fh:
            json.dump(result.to_json_dict(), fh, indent=2)
            fh.write("\n")
    for r in result.rows:
        click.echo(f"q={r['q']}: delta={r['delta']} eps1={r['eps1']} "
                   f"eps3={r['eps3']:.6g} fourier_eps={r['fourier_eps']:.6g} "
                   f"h_index={r['h_index']} max_coset_eps1={r['max_coset_eps1']}")
    if result.slope_eps1 is not None:
        click.echo(f"slope(log eps1 vs log q) = {result.slope_eps1:.4f}")
    if result.slope_fourier is not None:
        click.echo(f"slope(log fourier_eps vs log q) = {result.slope_fourier:.4f}")
    if result.zero_rows:
        click.echo(f"exact-zero rows (excluded from fit): q in {result.zero_rows}")


@cli.command("verify")
@click.option("--suite", required=True,
              type=click.Choice(sorted(reglab.VERIFY_SUITES)))
@click.option("--seed", default=0, show_default=True)
def verify_cmd(suite, seed):
    """Runs a relation-verification suite; exits 2 on any violation."""
    result = reglab.run_verify_suite(suite, seed=seed)
    for line in result.lines:
        click.echo(line)
    for finding in result.findings:
        click.echo(f"finding: {finding}")
    click.echo(f"suite {result.name}: {'PASS' if result.passed else 'FAIL'}")
    if not result.passed:
        sys.exit(2)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Exit as e:  # --help and friends
        sys.exit(e.exit_code)
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        sys.exit(1)
    except click.ClickException as e:
        e.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except QrlabError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
