"""Command-line front end: each pipeline as a subcommand with JSON/CSV I/O.

Subcommands wrap the library pipelines one-to-one:

* ``closed-form``  -- boundary datum JSON to closed-form monodromy JSON;
* ``numeric``      -- two-pole system JSON to integrated monodromy JSON;
* ``flow``         -- boundary datum JSON to deformation snapshots JSON;
* ``invert``       -- monodromy JSON back to a boundary datum JSON;
* ``toda-scan``    -- parameter-grid classification to CSV (and a scatter).

Exit codes: 0 success, 2 malformed input, 3 mathematical-domain error,
4 tolerance failure.  Every JSON document carries ``"format": 1`` and a
``"manifest"`` block naming the subcommand, the paths, the tolerances and
the seed; outputs are deterministic byte-for-byte for identical manifests.
"""
from __future__ import annotations

import cmath
import functools
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import jsonio
from .closedform import (
    Chamber,
    MonodromyData,
    boundary_datum,
    monodromy_from_boundary,
    similarity_residual,
    stokes_full,
)
from .errors import (
    DivergentIteration,
    DomainError,
    InputError,
    NonFiniteState,
    QuadratureFailure,
    StepUnderflow,
    ToleranceError,
)
from .flow import (
    Coordinates,
    boundary_to_hat,
    decoupled_tail_hat,
    inverse_monodromy,
    picard_flow,
)
from .odemono import LinearSystemSpec, numeric_monodromy_data
from .ttmodels import (
    bundled_order4_example,
    scan_csv_text,
    toda_scan,
    write_scan_csv,
)

try:
    from importlib.metadata import version as _dist_version

    _VERSION = _dist_version("isomonodromy")
except Exception:  # pragma: no cover - source tree without installed dist
    _VERSION = "0.1.0"

_STANDARD_COORDS = {
    2: ((1j, -2j), (0.0,)),
    3: ((1j, -1j, 2.0), (2.0, 0.0)),
}


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _guarded(fn):
    """Map the package's error taxonomy onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except InputError as exc:
            click.echo(f"input error: {exc}", err=True)
            sys.exit(2)
        except DomainError as exc:
            click.echo(f"domain error: {exc}", err=True)
            sys.exit(3)
        except ToleranceError as exc:
            click.echo(f"tolerance error: {exc}", err=True)
            sys.exit(4)

    return wrapper


def _manifest(subcommand: str, inputs, outputs, tolerances: dict,
              seed: int) -> dict:
    return {
        "subcommand": subcommand,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "tolerances": {k: float(v) for k, v in tolerances.items()},
        "seed": int(seed),
        "version": _VERSION,
    }


def _emit(doc: dict, out: str | None) -> None:
    if out is None:
        click.echo(jsonio.dumps(doc), nl=False)
    else:
        jsonio.dump(out, doc)


def _read_boundary(path: str):
    doc = jsonio.load(path)
    A_hat0 = jsonio.decode_matrix(jsonio.require(doc, "A_hat0"))
    G0 = jsonio.decode_matrix(jsonio.require(doc, "G0"))
    return doc, A_hat0, G0


def _is_diagonal(M: np.ndarray) -> bool:
    off = M - np.diag(np.diag(M))
    return float(np.max(np.abs(off))) <= 1e-14 * max(1.0, float(np.max(np.abs(M))))


def _ladder_spread(ladder) -> float:
    """Widest real-part spread across the ladder's levels."""
    return max((float(lv.real.max() - lv.real.min())
                for lv in ladder.levels if lv.size), default=0.0)


def _chamber_doc(chamber: Chamber) -> dict:
    return {"u_order": list(chamber.u_order), "v_order": list(chamber.v_order)}


def _monodromy_doc(md: MonodromyData) -> dict:
    return {
        "deltaA": jsonio.encode_vector(md.deltaA),
        "deltaGAG": jsonio.encode_vector(md.deltaGAG),
        "nu_inf": jsonio.encode_matrix(md.nu_inf),
        "nu_zero": jsonio.encode_matrix(md.nu_zero),
        "C": jsonio.encode_matrix(md.C),
        "direction": float(md.direction),
        "chamber": _chamber_doc(md.chamber),
        "similarity_residual": similarity_residual(md.nu_inf, md.nu_zero, md.C),
    }


def _decode_monodromy(doc: dict) -> MonodromyData:
    nu_inf = jsonio.decode_matrix(jsonio.require(doc, "nu_inf"))
    n = nu_inf.shape[0]
    ch = doc.get("chamber")
    if ch is None:
        chamber = Chamber.standard(n)
    else:
        chamber = Chamber(u_order=tuple(int(k) for k in ch["u_order"]),
                          v_order=tuple(int(k) for k in ch["v_order"]))
    return MonodromyData(
        deltaA=jsonio.decode_vector(jsonio.require(doc, "deltaA")),
        deltaGAG=jsonio.decode_vector(jsonio.require(doc, "deltaGAG")),
        nu_inf=nu_inf,
        nu_zero=jsonio.decode_matrix(jsonio.require(doc, "nu_zero")),
        C=jsonio.decode_matrix(jsonio.require(doc, "C")),
        direction=float(doc.get("direction", 0.0)),
        chamber=chamber,
    )


def _parse_complex_list(text: str) -> list[complex]:
    values = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            values.append(complex(chunk))
        except ValueError as exc:
            raise InputError(f"cannot parse {chunk!r} as a complex number") from exc
    return values


def _parse_axis(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"grid axis must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"grid axis must be numeric, got {text!r}") from exc
    return lo, hi, step


# ---------------------------------------------------------------------------
# the command group
# ---------------------------------------------------------------------------

@click.group()
@click.version_option(version=_VERSION, prog_name="isomono")
def main() -> None:
    """Monodromy data of two-pole linear systems: closed forms, numerics,
    deformation flows, inverse problems, and parameter scans."""


@main.command("closed-form")
@click.argument("input_path", type=str)
@click.option("--direction", type=float, default=0.0, show_default=True,
              help="Admissible direction at which the data is labelled.")
@click.option("--tol", type=float, default=1e-8, show_default=True,
              help="Ladder/assembly tolerance.")
@click.option("--out", "-o", type=str, default=None,
              help="Output JSON path (stdout when omitted).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Recorded in the manifest; no effect on this subcommand.")
@_guarded
def cmd_closed_form(input_path: str, direction: float, tol: float,
                    out: str | None, seed: int) -> None:
    """Closed-form monodromy data of a boundary datum JSON file
    (fields A_hat0, G0)."""
    _, A_hat0, G0 = _read_boundary(input_path)
    bd = boundary_datum(A_hat0, G0, tol=tol)
    md = monodromy_from_boundary(bd, direction=direction)
    Sp_inf, Sm_inf = stokes_full(md.nu_inf, md.deltaA)
    Sp_zero, Sm_zero = stokes_full(md.nu_zero, -md.deltaGAG)
    provenance = {
        "nu_inf_formula": ("exponential-of-diagonal" if _is_diagonal(bd.A_hat0)
                           else "factor-chain"),
        "nu_zero_formula": ("exponential-of-diagonal" if _is_diagonal(bd.A_til0)
                            else "factor-chain"),
        "connection_formula": ("frame-only"
                               if _is_diagonal(bd.A_hat0) and _is_diagonal(bd.A_til0)
                               else "chain-conjugated-frame"),
        "ladder_spread_inf": _ladder_spread(bd.ladder_hat),
        "ladder_spread_zero": _ladder_spread(bd.ladder_til),
        "non_resonant": bool(bd.non_resonant),
        "shrinking": bool(bd.shrinking),
    }
    doc = {
        "manifest": _manifest("closed-form", [input_path],
                              [out] if out else [], {"tol": tol}, seed),
        **_monodromy_doc(md),
        "stokes": {
            "inf_plus": jsonio.encode_matrix(Sp_inf),
            "inf_minus": jsonio.encode_matrix(Sm_inf),
            "zero_plus": jsonio.encode_matrix(Sp_zero),
            "zero_minus": jsonio.encode_matrix(Sm_zero),
        },
        "provenance": provenance,
    }
    _emit(doc, out)


@main.command("numeric")
@click.argument("input_path", type=str)
@click.option("--direction", type=float, default=0.0, show_default=True,
              help="Direction label of the Stokes sectors.")
@click.option("--tol", type=float, default=1e-10, show_default=True,
              help="Transport tolerance.")
@click.option("--anchor-radius", type=float, default=None,
              help="Override the automatic sector anchor radius.")
@click.option("--estimate/--no-estimate", default=True, show_default=True,
              help="Attach a two-tolerance accuracy estimate.")
@click.option("--out", "-o", type=str, default=None,
              help="Output JSON path (stdout when omitted).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Recorded in the manifest; no effect on this subcommand.")
@_guarded
def cmd_numeric(input_path: str, direction: float, tol: float,
                anchor_radius: float | None, estimate: bool,
                out: str | None, seed: int) -> None:
    """Numerically integrated monodromy data of a two-pole system JSON file
    (fields u, A, v, G)."""
    doc_in = jsonio.load(input_path)
    u = jsonio.decode_vector(jsonio.require(doc_in, "u"))
    A = jsonio.decode_matrix(jsonio.require(doc_in, "A"))
    v = doc_in.get("v")
    G = doc_in.get("G")
    spec = LinearSystemSpec(
        u=u, A=A,
        v=None if v is None else jsonio.decode_vector(v),
        G=None if G is None else jsonio.decode_matrix(G),
    )
    md, diag = numeric_monodromy_data(spec, d=direction, tol=tol,
                                      R=anchor_radius)
    accuracy = None
    if estimate:
        # one coarser companion run; the component-wise gap bounds the
        # coarse run's error and is a conservative estimate for this one
        md_coarse, _ = numeric_monodromy_data(spec, d=direction,
                                              tol=min(tol * 100.0, 1e-6),
                                              R=anchor_radius)
        accuracy = max(
            float(np.max(np.abs(md.nu_inf - md_coarse.nu_inf))),
            float(np.max(np.abs(md.nu_zero - md_coarse.nu_zero))),
            float(np.max(np.abs(md.C - md_coarse.C))),
        )
    Sp_inf, Sm_inf = diag["S_inf"]
    Sp_zero, Sm_zero = diag["S_zero"]
    doc = {
        "manifest": _manifest("numeric", [input_path], [out] if out else [],
                              {"tol": tol, "direction": direction}, seed),
        **_monodromy_doc(md),
        "stokes": {
            "inf_plus": jsonio.encode_matrix(Sp_inf),
            "inf_minus": jsonio.encode_matrix(Sm_inf),
            "zero_plus": jsonio.encode_matrix(Sp_zero),
            "zero_minus": jsonio.encode_matrix(Sm_zero),
        },
        "diagnostics": {
            "lu_infinity": diag["lu_infinity"],
            "lu_zero": diag["lu_zero"],
            "similarity": diag["similarity"],
            "anchor_shift": diag["anchor_shift"],
            "accuracy_estimate": accuracy,
        },
    }
    _emit(doc, out)


@main.command("flow")
@click.argument("input_path", type=str)
@click.option("--t-values", type=str, default="", show_default=True,
              help="Comma-separated target times; empty echoes the anchor.")
@click.option("--tol", type=float, default=1e-10, show_default=True,
              help="Fixed-point tolerance.")
@click.option("--out", "-o", type=str, default=None,
              help="Output JSON path (stdout when omitted).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Recorded in the manifest; no effect on this subcommand.")
@_guarded
def cmd_flow(input_path: str, t_values: str, tol: float, out: str | None,
             seed: int) -> None:
    """Deformation-flow snapshots anchored at a boundary datum JSON file.

    The datum file may carry a "coords" block {"z": [...], "w": [...]}
    fixing the pole configuration; ranks 2 and 3 default to the standard
    configurations."""
    doc_in, A_hat0, G0 = _read_boundary(input_path)
    bd = boundary_datum(A_hat0, G0)
    coords_doc = doc_in.get("coords")
    if coords_doc is not None:
        z = tuple(jsonio.decode_vector(jsonio.require(coords_doc, "z")))
        w = tuple(jsonio.decode_vector(jsonio.require(coords_doc, "w")))
    elif bd.n in _STANDARD_COORDS:
        z, w = _STANDARD_COORDS[bd.n]
    else:
        raise InputError(
            f"no standard pole configuration at rank {bd.n}; "
            f"add a \"coords\" block to the datum file"
        )
    targets = sorted(_parse_complex_list(t_values), key=abs)
    snapshots = []
    anchor_doc = None
    for t in targets:
        coords = Coordinates(z=z, t=t, w=w)
        if bd.n == 2:
            A_hat, G_hat = boundary_to_hat(bd, coords)
        else:
            A_hat, G_hat = decoupled_tail_hat(bd, coords)
        if anchor_doc is None:
            anchor_doc = {"A_hat": jsonio.encode_matrix(A_hat),
                          "G_hat": jsonio.encode_matrix(G_hat)}
        try:
            state = picard_flow(A_hat, G_hat, coords.u, coords.v, t, tol=tol)
        except (DivergentIteration, StepUnderflow, NonFiniteState,
                QuadratureFailure) as exc:
            # the target time is outside the reach of the anchored flow:
            # report it as a domain boundary with a workable suggestion
            raise DomainError(
                f"flow did not converge at |t| = {abs(t):.6g} ({exc}); "
                f"retry with |t| <= {abs(t) / 16.0:.6g}"
            ) from exc
        snapshots.append({
            "t": jsonio.encode_complex(t),
            "A": jsonio.encode_matrix(state.A),
            "G": jsonio.encode_matrix(state.G),
            "B": jsonio.encode_matrix(state.B),
            "delta_GAG": jsonio.encode_vector(state.delta_GAG),
            "w1": jsonio.encode_complex(state.w1),
            "departure": float(np.max(np.abs(state.A - state.A_hat))),
            "sigma1": state.sigma1,
            "b_residual": state.b_residual,
            "sweeps": state.iteration,
            "anchor_t": jsonio.encode_complex(state.anchor_t),
        })
    if anchor_doc is None:
        anchor_doc = {"A_hat": jsonio.encode_matrix(A_hat0),
                      "G_hat": jsonio.encode_matrix(G0)}
    doc = {
        "manifest": _manifest("flow", [input_path], [out] if out else [],
                              {"tol": tol}, seed),
        "anchor": anchor_doc,
        "snapshots": snapshots,
    }
    _emit(doc, out)


@main.command("invert")
@click.argument("input_path", type=str)
@click.option("--tol", type=float, default=1e-8, show_default=True,
              help="Reconstruction tolerance.")
@click.option("--out", "-o", type=str, default=None,
              help="Output JSON path (stdout when omitted).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Recorded in the manifest; no effect on this subcommand.")
@_guarded
def cmd_invert(input_path: str, tol: float, out: str | None,
               seed: int) -> None:
    """Reconstruct the boundary datum behind a monodromy-data JSON file."""
    doc_in = jsonio.load(input_path)
    md = _decode_monodromy(doc_in)
    bd = inverse_monodromy(md, tol=tol)
    doc = {
        "manifest": _manifest("invert", [input_path], [out] if out else [],
                              {"tol": tol}, seed),
        "A_hat0": jsonio.encode_matrix(bd.A_hat0),
        "G0": jsonio.encode_matrix(bd.G0),
        "A_til0": jsonio.encode_matrix(bd.A_til0),
        "diagnostics": {
            "roundtrip_residual": float(getattr(bd, "roundtrip_residual", 0.0)),
            "til_consistency": float(getattr(bd, "til_consistency", 0.0)),
        },
    }
    _emit(doc, out)


@main.command("toda-scan")
@click.option("--grid", type=str, default="-0.95:0.95:0.1", show_default=True,
              help="lo:hi:step for both axes, or two comma-separated axes.")
@click.option("--mode", type=click.Choice(["synthetic", "tabulated"]),
              default="synthetic", show_default=True)
@click.option("--fixture", type=str, default=None,
              help="Tabulated Stokes JSON ('bundled' for the shipped "
                   "order-4 example).")
@click.option("--order", type=int, default=4, show_default=True,
              help="Matrix order for synthetic mode (4 or 5).")
@click.option("--tol", type=float, default=1e-6, show_default=True,
              help="Classification tolerance.")
@click.option("--out", "-o", type=str, default=None,
              help="CSV output path (stdout when omitted).")
@click.option("--plot", type=str, default=None,
              help="Write a static verdict scatter (PNG) to this path.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Recorded in the manifest; no effect on this subcommand.")
@_guarded
def cmd_toda_scan(grid: str, mode: str, fixture: str | None, order: int,
                  tol: float, out: str | None, plot: str | None,
                  seed: int) -> None:
    """Classify the Toda family over a parameter grid; CSV output."""
    axes = grid.split(",")
    if len(axes) == 1:
        g_axis = d_axis = _parse_axis(axes[0])
    elif len(axes) == 2:
        g_axis, d_axis = _parse_axis(axes[0]), _parse_axis(axes[1])
    else:
        raise InputError("grid takes at most two axes")
    grid_spec = ((g_axis[0], g_axis[1]), (d_axis[0], d_axis[1]), g_axis[2])
    if mode == "synthetic":
        source = "synthetic"
    else:
        if fixture in (None, "bundled"):
            source = str(bundled_order4_example())
        else:
            source = fixture
    records = toda_scan(grid=grid_spec, stokes_source=source,
                        n_plus_1=order, tol=tol)
    if out is None:
        click.echo(scan_csv_text(records), nl=False)
    else:
        write_scan_csv(records, out)
        flagged = sum(1 for r in records if not r.verdict)
        summary = {
            "manifest": _manifest("toda-scan",
                                  [] if mode == "synthetic" else [source],
                                  [p for p in (out, plot) if p],
                                  {"tol": tol}, seed),
            "points": len(records),
            "flagged": flagged,
        }
        click.echo(jsonio.dumps(summary), nl=False)
    if plot is not None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 5))
        ok = [(r.gamma, r.delta) for r in records if r.verdict]
        bad = [(r.gamma, r.delta) for r in records if not r.verdict]
        if ok:
            ax.scatter(*zip(*ok), s=12, c="tab:green", label="confined")
        if bad:
            ax.scatter(*zip(*bad), s=16, c="tab:red", marker="x",
                       label="flagged")
        ax.set_xlabel("gamma")
        ax.set_ylabel("delta")
        ax.legend(loc="upper right")
        fig.savefig(plot, dpi=150)
        plt.close(fig)


if __name__ == "__main__":
    main()
