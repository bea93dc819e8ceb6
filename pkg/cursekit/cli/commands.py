import logging

import click

from .. import discrepancy as disc
from .. import fooling, pointsets, positive
from ..config import CURSE_SAFETY_DELTA, THM3_D_MAX
from ..errors import ParameterError, UnsupportedError
from ..models import Backend, DiscrepancyKind, DiscrepancySettings, Family, SpaceKind, SpaceSpec
from ..spaces import inv_alpha_closed_form, worst_case_function
from ..weighted import standard_normal, worst_case_function_weighted
from .output import OutputFormat, OutputTable
from .plot import save_line_plot

logger = logging.getLogger(__name__)

WEIGHTED_GAUSS = "weighted-gauss"
SPACE_CHOICES = [kind.value for kind in SpaceKind] + [WEIGHTED_GAUSS]

CTILDE_Q_PUBLISHED = {2: 1.00016, 3: 1.00098, 4: 1.00161, 5: 1.00195, 10: 1.00204, 100: 1.00039, 1000: 1.00004}
CP_A_HALF_PUBLISHED = {2: 1.0198, 3: 1.01023, 4: 1.00465, 5: 1.00208, 10: 1.00004}
CPR_GRID_A = (0.3, 0.5, 0.7)
CPR_GRID_R = (1, 2, 3)
CPR_GRID_P = (1.0, 2.0, 5.0)


def format_option(fn):
    return click.option(
        "--format",
        "fmt",
        type=click.Choice([f.value for f in OutputFormat]),
        default=OutputFormat.CSV.value,
        show_default=True,
    )(fn)


def space_options(fn):
    for decorator in reversed(
        [
            click.option("--space", type=click.Choice(SPACE_CHOICES), default=SpaceKind.ANCHORED_SOBOLEV.value, show_default=True),
            click.option("--r", "r", type=click.IntRange(min=1), default=1, show_default=True),
            click.option("--q", "q", type=float, default=2.0, show_default=True, help="Norm exponent in (1, inf]."),
            click.option("--a", "a", type=float, default=0.5, show_default=True, help="Decomposition point / anchor."),
        ]
    ):
        fn = decorator(fn)
    return fn


def emit(table, fmt):
    click.echo(table.render(fmt), nl=False)


def decomposition_for(space, r, q, a):
    if space == WEIGHTED_GAUSS:
        return worst_case_function_weighted(standard_normal(r=r, q=q))
    return worst_case_function(SpaceSpec(kind=space, r=r, q=q, a=a))


# --- tables ---

def ctilde_q_table():
    rows = []
    for q, published in CTILDE_Q_PUBLISHED.items():
        consts = positive.p2_constants(float(q))
        rows.append((q, consts.c_tilde, published, abs(consts.c_tilde - published), consts.details["c_star"]))
    return OutputTable(
        title="C~_q for polynomials of degree <= 2",
        columns=[("q", ""), ("c_tilde", ""), ("published", ""), ("deviation", "abs"), ("c_star", "")],
        rows=rows,
    )


def cp_a_half_table():
    rows = []
    for p, published in CP_A_HALF_PUBLISHED.items():
        spec = SpaceSpec(kind=SpaceKind.NO_ANCHOR_SOBOLEV, p=float(p), a=0.5)
        consts = positive.dp_plus_constants(worst_case_function(spec), spec.q)
        closed = positive.w1_closed_form_cp(float(p), 0.5)
        rows.append((p, consts.c_tilde, closed, published, abs(consts.c_tilde - published)))
    return OutputTable(
        title="C_p for W^1_q without anchor, a = 1/2",
        columns=[("p", ""), ("c_p", ""), ("closed_form", ""), ("published", ""), ("deviation", "abs")],
        rows=rows,
    )


def cpr_grid_table(a_values=CPR_GRID_A):
    rows = []
    for a in a_values:
        for r in CPR_GRID_R:
            for p in CPR_GRID_P:
                spec = SpaceSpec(kind=SpaceKind.ANCHORED_SOBOLEV, r=r, p=p, a=a)
                dec = worst_case_function(spec)
                rows.append((a, r, p, inv_alpha_closed_form(spec), 1.0 / dec.alpha))
    return OutputTable(
        title="1/alpha = C_(p,r) for anchored Sobolev spaces",
        columns=[("a", ""), ("r", ""), ("p", ""), ("inv_alpha", "closed form"), ("inv_alpha_quadrature", "")],
        rows=rows,
    )


TABLES = {"ctilde-q": ctilde_q_table, "cp-a-half": cp_a_half_table, "cpr-grid": cpr_grid_table}


@click.command("tables")
@click.argument("which", type=click.Choice(list(TABLES)))
@click.option("--a", "a", type=float, default=None, help="Single anchor for cpr-grid.")
@format_option
def tables(which, a, fmt):
    """Reproduce the published constant tables."""
    if which == "cpr-grid" and a is not None:
        table = cpr_grid_table((a,))
    else:
        table = TABLES[which]()
    emit(table, fmt)


# --- certify ---

def _constants_text(constants):
    return ";".join(f"{k}={v:.17g}" for k, v in constants.items())


def positive_constants_for(space, dec):
    if space == SpaceKind.POLY2.value:
        return positive.p2_constants(dec.q)
    return positive.dp_plus_constants(dec, dec.q)


def certificates_for(space, dec, ps, theorems):
    certs = []
    for theorem in theorems:
        if theorem == "1":
            certs.append(fooling.certify_thm1(dec, ps))
        elif theorem == "3":
            if ps.d > THM3_D_MAX:
                logger.warning("d=%d exceeds %d; reporting the closed form only", ps.d, THM3_D_MAX)
                certs.append(fooling.closed_certificate_thm3(dec, ps.n, ps.d))
            else:
                certs.append(fooling.certify_thm3(dec, ps))
        else:
            certs.append(positive.positive_rule_bound(positive_constants_for(space, dec), ps.n, ps.d))
    return certs


@click.command("certify")
@click.argument("pointset_file", type=click.Path(exists=True, dir_okay=False))
@space_options
@click.option("--theorem", "theorems", type=click.Choice(["1", "3", "5"]), multiple=True, required=True)
@format_option
def certify(pointset_file, space, r, q, a, theorems, fmt):
    """Lower bounds on the error of every admissible rule using the given nodes."""
    domain = "real" if space == WEIGHTED_GAUSS else "cube"
    ps = pointsets.read(pointset_file, domain=domain)
    dec = decomposition_for(space, r, q, a)
    rows = [
        (
            cert.theorem.value,
            cert.n_nodes,
            cert.d,
            cert.bound_normalized,
            cert.bound_absolute,
            cert.initial_error,
            _constants_text(cert.constants_used),
        )
        for cert in certificates_for(space, dec, ps, theorems)
    ]
    table = OutputTable(
        title=f"certificates for {pointset_file} in {dec.label}",
        columns=[
            ("theorem", ""),
            ("n_nodes", ""),
            ("d", ""),
            ("bound_normalized", "e/e(0,d)"),
            ("bound_absolute", ""),
            ("initial_error", "e(0,d)"),
            ("constants", ""),
        ],
        rows=rows,
    )
    emit(table, fmt)


# --- discrepancy ---

@click.command("discrepancy")
@click.argument("pointset_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--family", type=click.Choice([f.value for f in Family]), default=Family.ANCHORED.value, show_default=True)
@click.option("--generalized", is_flag=True)
@click.option("--p-exp", "p", type=float, default=2.0, show_default=True)
@click.option("--a", "a", type=float, default=0.5, show_default=True)
@click.option("--backend", type=click.Choice([b.value for b in Backend]), default=Backend.CLOSED_FORM_P2.value, show_default=True)
@click.option("--seed", type=int, default=None, help="Required by the monte-carlo backend.")
@click.option("--samples", type=click.IntRange(min=2), default=None)
@format_option
def discrepancy(pointset_file, family, generalized, p, a, backend, seed, samples, fmt):
    """L_p discrepancy of a point set."""
    ps = pointsets.read(pointset_file)
    kind = DiscrepancyKind(family=family, generalized=generalized, p=p, a=a)
    overrides = {"seed": seed}
    if samples is not None:
        overrides["n_samples"] = samples
    result = disc.discrepancy(kind, ps, backend, DiscrepancySettings(**overrides))
    table = OutputTable(
        title=f"discrepancy of {pointset_file}",
        columns=[
            ("family", ""),
            ("generalized", ""),
            ("p", ""),
            ("a", ""),
            ("n_nodes", ""),
            ("backend", ""),
            ("value", ""),
            ("stderr", ""),
            ("initial", "empty set"),
        ],
        rows=[
            (
                kind.family.value,
                int(kind.generalized),
                kind.p,
                kind.a,
                ps.n,
                result.backend.value,
                result.value,
                result.stderr,
                disc.initial_discrepancy(kind, ps.d),
            )
        ],
    )
    emit(table, fmt)


# --- curse ---

def curse_constants(theorem, alpha, alpha3, delta, c_tilde):
    if theorem == "5":
        if c_tilde is None:
            raise ParameterError("theorem 5 needs --c-tilde")
        return {"c_tilde": c_tilde}
    if alpha is None:
        raise ParameterError(f"theorem {theorem} needs --alpha")
    if theorem == "1":
        return {"alpha": alpha}
    if alpha3 is None:
        raise ParameterError("theorem 3 needs --alpha3")
    return {"alpha": alpha, "alpha3": alpha3, "delta": delta}


def curse_table(theorem, constants, eps, d_values, with_log2=False):
    rows = []
    for d in d_values:
        try:
            bound = fooling.info_complexity_bound(theorem, constants, eps, d)
        except UnsupportedError:
            if not with_log2:
                raise
            bound = None
        row = (d, bound)
        if with_log2:
            row += (fooling.log2_info_complexity_bound(theorem, constants, eps, d),)
        rows.append(row)
    columns = [("d", ""), ("n_lower", "function values")]
    if with_log2:
        columns.append(("log2_n_lower", "bits"))
    title = f"lower bounds on N(eps={eps}, d), theorem {theorem}"
    if theorem == "3":
        title += " (asymptotic)"
    return OutputTable(title=title, columns=columns, rows=rows)


@click.command("curse")
@click.option("--theorem", type=click.Choice(["1", "3", "5"]), required=True)
@click.option("--alpha", type=float, default=None)
@click.option("--alpha3", type=float, default=None)
@click.option("--delta", type=float, default=CURSE_SAFETY_DELTA, show_default=True)
@click.option("--c-tilde", "c_tilde", type=float, default=None)
@click.option("--eps", type=float, required=True)
@click.option("--d", "d_range", type=(click.IntRange(min=1), click.IntRange(min=1)), default=(1, 10), show_default=True, help="First and last d.")
@click.option("--log2", "with_log2", is_flag=True)
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False), default=None, help="Write an SVG plot here.")
@format_option
def curse(theorem, alpha, alpha3, delta, c_tilde, eps, d_range, with_log2, plot_path, fmt):
    """Information complexity lower bounds along a range of dimensions."""
    first, last = d_range
    if last < first:
        raise ParameterError(f"empty d range {first}..{last}")
    constants = curse_constants(theorem, alpha, alpha3, delta, c_tilde)
    table = curse_table(theorem, constants, eps, range(first, last + 1), with_log2)
    if plot_path:
        y = "log2_n_lower" if with_log2 else "n_lower"
        save_line_plot(table, "d", y, plot_path, log_y=not with_log2)
        logger.info("plot written to %s", plot_path)
    emit(table, fmt)


# --- generate ---

@click.command("generate")
@click.option("--kind", type=click.Choice([k.value for k in pointsets.GeneratorKind]), required=True)
@click.option("--d", "d", type=click.IntRange(min=1), required=True)
@click.option("--n", "n", type=click.IntRange(min=0), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True)
def generate(kind, d, n, seed, out):
    """Write a generated point set to a file."""
    ps = pointsets.generate(kind, d, n, seed)
    pointsets.write(ps, out)
    logger.info("wrote %d nodes in d=%d to %s", ps.n, ps.d, out)
    click.echo(out)


COMMANDS = [tables, certify, discrepancy, curse, generate]