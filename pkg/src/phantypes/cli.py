"""Command-line driver over project files.

Exit codes: 0 ok, 1 domain failure (counterexample, type error,
violation, disagreement), 2 usage or project-file error.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .codegen import emit_interface
from .dsl import Project, load_project
from .encodings import SchemeConfigError, check_respectful
from .errors import ParseError, PhantypesError
from .hierarchy import HierarchyError
from .phantom import FreshSupply, show
from .source_calculus import SScheme, check_pi_f_sound, eval_source, show_source, show_stype, typecheck
from .target_calculus import TScheme, check_pi_f_sound_t, eval_t, show_target, show_ttype, typecheck_t
from .terms import DEFAULT_FUEL, erase
from .translation import (TranslationError, check_expressible, trans_interp, translate,
                          verify_preservation)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SCHEME_CHOICES = ["tree", "powerset", "embed", "width", "infinite"]


class UsageError(Exception):
    pass


class Reporter:
    def __init__(self, command: str, as_json: bool):
        self.command, self.as_json = command, as_json

    def text(self, line: str = "") -> None:
        if not self.as_json:
            click.echo(line)

    def json(self, payload: dict) -> None:
        if self.as_json:
            click.echo(json.dumps({"command": self.command, **payload}, sort_keys=True))

    def error(self, err: Exception, code: int) -> int:
        kind = type(err).__name__
        if self.as_json:
            self.json({"ok": False, "error": {"kind": kind, "message": str(err)}})
        else:
            click.echo(f"error: {kind}: {err}", err=True)
        return code


def _command(name: str, *, encoding=True, calculus=False, program=False, fuel=False, out=False):
    """Attach the shared options and map exceptions to exit codes."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(project_path, as_json, **kw):
            rep = Reporter(name, as_json)
            try:
                project = load_project(project_path)
            except (ParseError, HierarchyError, SchemeConfigError) as err:
                sys.exit(rep.error(err, EXIT_USAGE))
            except OSError as err:
                sys.exit(rep.error(err, EXIT_USAGE))
            try:
                code = fn(project, rep, **kw)
            except (UsageError, SchemeConfigError) as err:
                code = rep.error(err, EXIT_USAGE)
            except PhantypesError as err:
                code = rep.error(err, EXIT_FAIL)
            sys.exit(code)

        run = click.option("--json", "as_json", is_flag=True, help="Print a JSON report.")(run)
        if out:
            run = click.option("--out", type=click.Path(dir_okay=False), help="Write output to PATH.")(run)
        if fuel:
            run = click.option("--fuel", type=click.IntRange(min=0), default=DEFAULT_FUEL, show_default=True,
                               help="Maximum reduction steps.")(run)
        if program:
            run = click.option("--program", "program_name", help="Only this named program.")(run)
        if calculus:
            run = click.option("--calculus", type=click.Choice(["source", "target"]),
                               help="Calculus to use (default: both where meaningful).")(run)
        if encoding:
            run = click.option("--ctor", help="Constructor policy: T, perSort, or a constructor name.")(run)
            run = click.option("--scheme", type=click.Choice(SCHEME_CHOICES), help="Encoding scheme.")(run)
        run = click.argument("project_path", type=click.Path(dir_okay=False))(run)
        return main.command(name)(run)

    return wrap


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Phantom-type encodings of subtyping hierarchies."""


def _target_skip(pair, calculus) -> str | None:
    """Why the target side is skipped when no calculus was requested."""
    if calculus is not None:
        return None
    try:
        check_expressible(pair)
    except TranslationError as err:
        return str(err)
    return None


def _selected(programs: dict, name: str | None) -> dict:
    if name is None:
        return programs
    if name not in programs:
        raise UsageError(f"no program named {name}")
    return {name: programs[name]}


@_command("encode")
def encode_cmd(project: Project, rep: Reporter, scheme=None, ctor=None) -> int:
    pair = project.encoding(scheme, ctor)
    for s in project.hierarchy.sorts:
        conc, abst = show(pair.conc(s)), show(pair.abst(s, FreshSupply()))
        rep.text(f"sort {s}: conc = {conc}; abst = {abst}")
        if rep.as_json:
            click.echo(json.dumps({"sort": s, "conc": conc, "abst": abst}))
    return EXIT_OK


@_command("check-respectful")
def check_respectful_cmd(project: Project, rep: Reporter, scheme=None, ctor=None) -> int:
    pair, h = project.encoding(scheme, ctor), project.hierarchy
    cex = check_respectful(pair, h)
    pairs = len(h.sorts) ** 2
    if cex is None:
        rep.text(f"respectful: {pair.scheme} encoding, {pairs} sort pairs checked")
        rep.json({"ok": True, "scheme": pair.scheme, "pairs": pairs, "counterexample": None})
        return EXIT_OK
    rep.text(f"not respectful: {cex}")
    rep.json({"ok": False, "scheme": pair.scheme, "pairs": pairs,
              "counterexample": {"sub": cex.sub, "sup": cex.sup, "direction": cex.direction}})
    return EXIT_FAIL


def _target_terms(project: Project, pair, name):
    """Hand-written target programs if the project has any, otherwise the
    translations of its source programs."""
    if project.target_programs:
        return trans_interp(project.interp, pair), _selected(project.target_programs, name)
    translated = {n: translate(project.interp, pair, e) for n, e in _selected(project.programs, name).items()}
    interp = trans_interp(project.interp, pair)
    return interp, {n: tr.target for n, tr in translated.items()}


@_command("typecheck", calculus=True, program=True)
def typecheck_cmd(project: Project, rep: Reporter, scheme=None, ctor=None, calculus=None,
                  program_name=None) -> int:
    results, code = [], EXIT_OK
    if calculus in (None, "source"):
        for n, e in _selected(project.programs, program_name).items():
            results.append(_check_one("source", n, lambda e=e: show_stype(typecheck(project.interp, e))))
    if calculus == "target" or (calculus is None and project.target_programs):
        interp, terms = _target_terms(project, project.encoding(scheme, ctor), program_name)
        for n, e in terms.items():
            results.append(_check_one("target", n, lambda e=e: show_ttype(typecheck_t(interp, e))))
    if not results:
        raise UsageError("the project has no programs to check")
    for r in results:
        if r["ok"]:
            rep.text(f"{r['calculus']} {r['program']} : {r['type']}")
        else:
            code = EXIT_FAIL
            rep.text(f"{r['calculus']} {r['program']} : error: {r['error']['kind']}: {r['error']['message']}")
    rep.json({"ok": code == EXIT_OK, "results": results})
    return code


def _check_one(calculus, name, thunk) -> dict:
    try:
        return {"calculus": calculus, "program": name, "ok": True, "type": thunk()}
    except PhantypesError as err:
        return {"calculus": calculus, "program": name, "ok": False,
                "error": {"kind": type(err).__name__, "message": str(err)}}


def _interp_lines(tinterp) -> list[str]:
    lines = [f"constant {c} : {show_ttype(t)}" for c, t in tinterp.constants.items()]
    for f, arrows in tinterp.ops.items():
        lines.append(f"op {f} : " + " | ".join(show_ttype(a) for a in arrows))
    return lines


@_command("translate", program=True, out=True)
def translate_cmd(project: Project, rep: Reporter, scheme=None, ctor=None, program_name=None, out=None) -> int:
    pair = project.encoding(scheme, ctor)
    programs = _selected(project.programs, program_name)
    if not programs:
        raise UsageError("the project has no source programs")
    tinterp = trans_interp(project.interp, pair)
    lines = ["# target interpretation", *_interp_lines(tinterp)]
    reports, code = [], EXIT_OK
    for n, e in programs.items():
        tr = translate(project.interp, pair, e)
        report = verify_preservation(project.interp, pair, e, tr)
        if not report.preserved:
            code = EXIT_FAIL
        lines += ["", f"# program {n}", show_target(tr.target), f"# source type: {report.source_type}",
                  f"# target type: {report.target_type}", f"# preserved: {'yes' if report.preserved else 'no'}"]
        reports.append({"program": n, "source": show_source(e), "target": show_target(tr.target),
                        **report.as_json()})
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        rep.text(text.rstrip("\n"))
    rep.json({"ok": code == EXIT_OK, "interpretation": _interp_lines(tinterp), "programs": reports})
    return code


@_command("run", calculus=True, program=True, fuel=True)
def run_cmd(project: Project, rep: Reporter, scheme=None, ctor=None, calculus=None, program_name=None,
            fuel=DEFAULT_FUEL) -> int:
    runs = []
    if calculus == "target" and project.target_programs:
        interp, terms = _target_terms(project, project.encoding(scheme, ctor), program_name)
        for n, e in terms.items():
            if isinstance(typecheck_t(interp, e), TScheme):
                runs.append({"program": n, "skipped": "polymorphic"})
            else:
                runs.append({"program": n, "target": _outcome(eval_t(interp, e, fuel), show_target)})
    else:
        programs = _selected(project.programs, program_name)
        if not programs:
            raise UsageError("the project has no source programs")
        pair = project.encoding(scheme, ctor) if calculus != "source" else None
        skip = _target_skip(pair, calculus) if pair is not None else None
        if skip:
            rep.text(f"# target skipped: {skip}")
            calculus = "source"
        for n, e in programs.items():
            runs.append(_run_program(project, pair, n, e, calculus, fuel))
    code = EXIT_OK
    for entry in runs:
        if "skipped" in entry:
            rep.text(f"{entry['program']}: skipped ({entry['skipped']} programs are not evaluated)")
            continue
        parts = [f"{k} = {entry[k]['value']} ({entry[k]['status']}, {entry[k]['steps']} steps)"
                 for k in ("source", "target") if k in entry]
        line = f"{entry['program']}: " + "; ".join(parts)
        if "agree" in entry:
            line += "; agree" if entry["agree"] else "; DISAGREE"
        rep.text(line)
        if any(entry[k]["status"] != "value" for k in ("source", "target") if k in entry):
            code = EXIT_FAIL
        if entry.get("agree") is False:
            code = EXIT_FAIL
    rep.json({"ok": code == EXIT_OK, "runs": runs})
    return code


def _run_program(project, pair, name, e, calculus, fuel) -> dict:
    if isinstance(typecheck(project.interp, e), SScheme):
        return {"program": name, "skipped": "polymorphic"}
    entry: dict = {"program": name}
    if calculus in (None, "source"):
        src = eval_source(project.interp, e, fuel)
        entry["source"] = _outcome(src, show_source)
    if calculus in (None, "target"):
        tr = translate(project.interp, pair, e)
        typecheck_t(tr.interp, tr.target)
        tgt = eval_t(tr.interp, tr.target, fuel)
        entry["target"] = _outcome(tgt, show_target)
    if calculus is None:
        entry["agree"] = src.status == tgt.status == "value" and erase(src.term) == erase(tgt.term)
    return entry


def _outcome(result, printer) -> dict:
    return {"status": result.status, "steps": result.steps, "value": printer(result.term)}


@_command("emit-interface", out=True)
def emit_interface_cmd(project: Project, rep: Reporter, scheme=None, ctor=None, out=None) -> int:
    if project.interface is None:
        raise UsageError("the project has no interface block")
    text = emit_interface(project.interface, project.encoding(scheme, ctor), project.hierarchy)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        rep.text(f"wrote {out}")
    else:
        rep.text(text.rstrip("\n"))
    rep.json({"ok": True, "out": out, "lines": text.count("\n")})
    return EXIT_OK


@_command("check-soundness", calculus=True)
def check_soundness_cmd(project: Project, rep: Reporter, scheme=None, ctor=None, calculus=None) -> int:
    results = []
    if calculus in (None, "source"):
        v = check_pi_f_sound(project.interp)
        results.append({"calculus": "source", "ok": v is None, "violation": None if v is None else str(v)})
    pair = project.encoding(scheme, ctor)
    skip = _target_skip(pair, calculus)
    if skip:
        rep.text(f"# target skipped: {skip}")
    elif calculus in (None, "target"):
        tinterp = trans_interp(project.interp, pair)
        v = check_pi_f_sound_t(tinterp)
        results.append({"calculus": "target", "ok": v is None, "violation": None if v is None else str(v)})
    for r in results:
        rep.text(f"{r['calculus']}: " + ("sound" if r["ok"] else f"unsound: {r['violation']}"))
    ok = all(r["ok"] for r in results)
    rep.json({"ok": ok, "results": results})
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    main()
