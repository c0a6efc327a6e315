from dataclasses import dataclass, field
from typing import Any, Optional

from pi_coindex.arith import ones_disjoint
from pi_coindex.bilinear import Construction, catalog, certify, kind_rank, nonsingularity_probe
from pi_coindex.kneser import chromatic_number, kneser_graph
from pi_coindex.library import simplex
from pi_coindex.models import (
    BoundCertificate,
    CellKind,
    CoindexError,
    DerivationStep,
    RadonTable,
    Rule,
    Side,
    TableCell,
)
from pi_coindex.simplicial import SimplicialComplex
from pi_coindex.utils.bits import binary
from pi_coindex.utils.logging_utils import get_logger
from pi_coindex.utils.settings import get_settings

log = get_logger(__name__)

_COLORING_RULES = (Rule.COLORING_BOUND, Rule.SEPARATING_MAP_BOUND)
_MONOTONE_RULES = (Rule.MONOTONE_D, Rule.DIAGONAL_MONOTONE)


@dataclass(frozen=True)
class BoundQuery:
    """Ambient dimension ``d`` with ``ell`` sign-flipped coordinates.

    ``embed_dim`` falls back to the complex's own metadata when not given.
    """

    complex: SimplicialComplex
    d: int
    ell: int
    c_override: Optional[int] = None
    embed_dim: Optional[int] = None

    def __post_init__(self):
        if self.d < 0:
            raise ValueError(f"d must be nonnegative, got {self.d}")
        if not 0 <= self.ell <= self.d:
            raise ValueError(f"ell must lie in [0, d={self.d}], got {self.ell}")
        if self.c_override is not None and self.c_override < 0:
            raise ValueError(f"c must be nonnegative, got {self.c_override}")
        if self.embed_dim is not None and self.embed_dim < 1:
            raise ValueError(f"embed_dim must be positive, got {self.embed_dim}")

    @property
    def effective_embed_dim(self) -> Optional[int]:
        return self.embed_dim if self.embed_dim is not None else self.complex.embed_dim

    @property
    def diagonal(self) -> bool:
        return self.ell == self.d


@dataclass(frozen=True)
class Separation:
    """The number of colors c fed to the coloring bound, and where it came from."""

    c: int
    rule: Rule
    exact: bool = True
    params: dict[str, Any] = field(default_factory=dict)


def separation(query: BoundQuery, node_budget: Optional[int] = None) -> Separation:
    if query.c_override is not None:
        return Separation(query.c_override, Rule.SEPARATING_MAP_BOUND, params={"assumed": True})
    graph = kneser_graph(query.complex)
    cert = chromatic_number(graph, node_budget=node_budget)
    params = {
        "nonfaces": [list(face.vertices) for face in graph.vertices],
        "coloring": list(cert.assignment),
    }
    if not cert.exact:
        params["chromatic_interval"] = [cert.lower, cert.upper]
    return Separation(cert.num_colors, Rule.COLORING_BOUND, exact=cert.exact, params=params)


def _coloring_step(n: int, d: int, ell: int, sep: Separation) -> Optional[DerivationStep]:
    m = d - n + sep.c + 2
    if not 0 <= m <= ell or not ones_disjoint(m, ell - m):
        return None
    params = {
        "n": n,
        "c": sep.c,
        "d": d,
        "ell": ell,
        "m": m,
        "ell_minus_m": ell - m,
        "m_binary": binary(m),
        "ell_minus_m_binary": binary(ell - m),
        **sep.params,
    }
    return DerivationStep(sep.rule, Side.UPPER, m - 1, params)


def upper_theorem(
    query: BoundQuery, node_budget: Optional[int] = None, sep: Optional[Separation] = None
) -> Optional[tuple[int, DerivationStep]]:
    """Coloring bound at d itself: coindex <= m - 1 with m = d - n + c + 2."""
    sep = sep or separation(query, node_budget)
    if not sep.exact:
        return None
    step = _coloring_step(query.complex.n, query.d, query.ell, sep)
    return (step.bound, step) if step else None


def upper_monotone(
    query: BoundQuery,
    horizon: int,
    node_budget: Optional[int] = None,
    sep: Optional[Separation] = None,
) -> Optional[tuple[int, list[DerivationStep]]]:
    """Smallest coloring bound over d' in [d, horizon], moved back to d by monotonicity.

    With ell = d the search follows the diagonal ell' = d'; otherwise ell stays fixed.
    """
    if horizon < query.d:
        raise ValueError(f"horizon {horizon} is below d={query.d}")
    sep = sep or separation(query, node_budget)
    if not sep.exact:
        return None
    for d_prime in range(query.d, horizon + 1):
        ell = d_prime if query.diagonal else query.ell
        step = _coloring_step(query.complex.n, d_prime, ell, sep)
        if step is None:
            continue
        # the bound grows with d', so the first hit is the minimum
        steps = [step]
        if d_prime > query.d:
            rule = Rule.DIAGONAL_MONOTONE if query.diagonal else Rule.MONOTONE_D
            params: dict[str, Any] = {"from_d": query.d, "to_d": d_prime}
            if not query.diagonal:
                params["ell"] = query.ell
            steps.append(DerivationStep(rule, Side.UPPER, step.bound, params))
        return step.bound, steps
    log.debug(f"No coloring bound for {query.complex.label} with d in [{query.d}, {horizon}]")
    return None


def lower_constructions(e: int, d: int) -> Optional[tuple[int, DerivationStep]]:
    """Largest q with a catalog map R^a x R^(q+1) -> R^d'' where a >= e and d'' <= d.

    Ties prefer the earlier catalog kind, then smaller parameters, then the
    unswapped map.
    """
    if e < 1:
        raise ValueError(f"embed_dim must be positive, got {e}")
    if d < e:
        return None
    best: Optional[tuple[tuple[int, int, tuple[int, ...], int], Construction]] = None
    for base in catalog(d):
        a, b, _ = base.base_dims
        for swapped, (first, second) in ((False, (a, b)), (True, (b, a))):
            if first < e:
                continue
            key = (-(second - 1), kind_rank(base.kind), base.params, int(swapped))
            if best is None or key < best[0]:
                best = key, Construction(base.kind, base.params, swapped=swapped)
    if best is None:
        return None
    chosen = best[1]
    a, b, out = chosen.swapped_dims
    recipe = Construction(
        chosen.kind,
        chosen.params,
        swapped=chosen.swapped,
        restrict_to=(e, b) if a > e else None,
        codomain=d if out < d else None,
    )
    q = b - 1
    params = {"e": e, "d": d, "q": q, "construction_id": recipe.label, "construction": recipe.to_dict()}
    return q, DerivationStep(Rule.BILINEAR_LOWER, Side.LOWER, q, params)


def coindex_bounds(
    query: BoundQuery,
    horizon: Optional[int] = None,
    node_budget: Optional[int] = None,
) -> BoundCertificate:
    """Combine the coloring bound, monotonicity and bilinear constructions into one interval."""
    horizon = horizon if horizon is not None else query.d + get_settings().horizon_margin
    sep = separation(query, node_budget)
    steps: list[DerivationStep] = []
    upper = None
    found = upper_monotone(query, horizon, sep=sep)
    if found is not None:
        upper, upper_steps = found
        steps.extend(upper_steps)

    lower = None
    e = query.effective_embed_dim
    if e is not None and query.diagonal:
        built = lower_constructions(e, query.d)
        if built is not None:
            lower, step = built
            steps.append(step)
    if e is not None and e <= query.d and query.ell >= 1 and lower is None:
        lower = 0
        steps.append(
            DerivationStep(Rule.EMBEDDING_EXISTS, Side.LOWER, 0, {"e": e, "d": query.d, "ell": query.ell})
        )

    summary = {
        "complex": query.complex.label,
        "n": query.complex.n,
        "d": query.d,
        "ell": query.ell,
        "c": sep.c,
        "c_override": query.c_override,
        "embed_dim": e,
        "horizon": horizon,
    }
    log.debug(f"Bounds for {summary}: [{lower}, {upper}]")
    return BoundCertificate(lower, upper, tuple(steps), summary, budget_exceeded=not sep.exact)


def simplex_boundary_bounds(p: int, d: int, horizon: Optional[int] = None) -> BoundCertificate:
    """Bounds for the boundary of the (p+1)-simplex in R^d.

    An almost-embedding of the boundary extends to one of the full simplex,
    whose Kneser graph is empty, so the upper bound is taken there.
    """
    if p < 1 or d < 1:
        raise ValueError(f"p and d must be positive, got p={p}, d={d}")
    cert = coindex_bounds(BoundQuery(simplex(p + 1), d, d, embed_dim=p + 1), horizon=horizon)
    steps = list(cert.upper_steps)
    if cert.upper is not None:
        steps.append(DerivationStep(Rule.SIMPLEX_EXTENSION, Side.UPPER, cert.upper, {"p": p}))
    query = {**cert.query, "complex": f"∂Δ_{p + 1}", "via": f"Δ_{p + 1}", "p": p}
    return BoundCertificate(cert.lower, cert.upper, tuple(steps) + cert.lower_steps, query)


def radon_table(p_max: int, d_max: int, horizon_margin: Optional[int] = None) -> RadonTable:
    if p_max < 1 or d_max < 1:
        raise ValueError(f"p_max and d_max must be positive, got ({p_max}, {d_max})")
    margin = horizon_margin if horizon_margin is not None else get_settings().horizon_margin
    cells = []
    for p in range(1, p_max + 1):
        for d in range(1, d_max + 1):
            cert = simplex_boundary_bounds(p, d, horizon=d + margin)
            if cert.upper == -1:
                kind = CellKind.EMPTY
            elif cert.exact:
                kind = CellKind.EXACT
            else:
                kind = CellKind.INTERVAL
            direct = not any(s.rule in _MONOTONE_RULES for s in cert.upper_steps) and cert.upper is not None
            cells.append(TableCell(p, d, kind, cert.lower, cert.upper, direct, cert))
    log.info(f"Built {p_max}x{d_max} table")
    return RadonTable(p_max, d_max, tuple(cells))


def closed_form_rp2(d: int) -> int:
    if d < 4:
        raise ValueError(f"closed form for RP2 needs d >= 4, got {d}")
    return 4 * (d // 4) - 1


def closed_form_cp2(d: int) -> int:
    if d < 7:
        raise ValueError(f"closed form for CP2 needs d >= 7, got {d}")
    if d % 8 == 7:
        return d - 7
    return 8 * (d // 8) - 1


def replay(
    cert: BoundCertificate,
    complex_: Optional[SimplicialComplex] = None,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> list[str]:
    """Re-check every derivation step from its recorded parameters.

    Returns the problems found; an empty list means the certificate holds.
    """
    settings = get_settings()
    trials = trials if trials is not None else settings.replay_trials
    seed = seed if seed is not None else settings.probe_seed
    if complex_ is None and isinstance(cert.query.get("p"), int):
        complex_ = simplex(cert.query["p"] + 1)
    problems: list[str] = []
    coloring_step: Optional[DerivationStep] = None
    for index, step in enumerate(cert.derivation):
        where = f"step {index} ({step.rule})"
        try:
            if step.rule in _COLORING_RULES:
                coloring_step = step
                problems += [f"{where}: {p}" for p in _replay_coloring_bound(step, complex_)]
            elif step.rule in _MONOTONE_RULES or step.rule == Rule.SIMPLEX_EXTENSION:
                problems += [f"{where}: {p}" for p in _replay_upper_transfer(step, coloring_step)]
            elif step.rule == Rule.BILINEAR_LOWER:
                problems += [f"{where}: {p}" for p in _replay_bilinear(step, trials, seed)]
            elif step.rule == Rule.EMBEDDING_EXISTS:
                prm = step.params
                if not (prm["e"] <= prm["d"] and prm["ell"] >= 1 and step.bound == 0):
                    problems.append(f"{where}: embedding in R^{prm['e']} does not give lower 0 for {prm}")
        except (KeyError, TypeError, ValueError, CoindexError) as e:
            problems.append(f"{where}: malformed parameters ({e})")

    problems += _replay_against_query(cert)
    uppers = [s.bound for s in cert.upper_steps]
    if (uppers[-1] if uppers else None) != cert.upper:
        problems.append(f"upper {cert.upper} does not match derivation {uppers}")
    lowers = [s.bound for s in cert.lower_steps]
    if (max(lowers) if lowers else None) != cert.lower:
        problems.append(f"lower {cert.lower} does not match derivation {lowers}")
    if cert.lower is not None and cert.upper is not None and cert.lower > cert.upper:
        problems.append(f"lower {cert.lower} exceeds upper {cert.upper}")
    for problem in problems:
        log.debug(f"Replay problem: {problem}")
    return problems


def _replay_against_query(cert: BoundCertificate) -> list[str]:
    """Tie each step to the query the certificate claims to answer."""
    query = cert.query
    missing = [key for key in ("n", "d", "ell") if key not in query]
    if missing:
        return [f"query lacks {', '.join(missing)}"]
    n, d, ell = query["n"], query["d"], query["ell"]
    problems = []
    upper = list(cert.upper_steps)
    coloring = next((s for s in upper if s.rule in _COLORING_RULES), None)
    transfer = next((s for s in upper if s.rule in _MONOTONE_RULES), None)
    if coloring is not None:
        prm = coloring.params
        if prm.get("n") != n:
            problems.append(f"coloring bound is for n={prm.get('n')}, query has n={n}")
        if "c" in query and prm.get("c") != query["c"]:
            problems.append(f"coloring bound uses c={prm.get('c')}, query has c={query['c']}")
        if transfer is None and (prm.get("d") != d or prm.get("ell") != ell):
            problems.append(f"coloring bound at (d={prm.get('d')}, ell={prm.get('ell')}) answers a different query (d={d}, ell={ell})")
    if transfer is not None:
        prm = transfer.params
        if prm.get("from_d") != d:
            problems.append(f"monotone step starts at d={prm.get('from_d')}, query has d={d}")
        if transfer.rule == Rule.DIAGONAL_MONOTONE and ell != d:
            problems.append(f"diagonal step needs ell = d, query has ell={ell}, d={d}")
        if transfer.rule == Rule.MONOTONE_D and prm.get("ell") != ell:
            problems.append(f"fixed-ell step with ell={prm.get('ell')}, query has ell={ell}")
    for step in cert.derivation:
        prm = step.params
        if step.rule == Rule.SIMPLEX_EXTENSION and "p" in query and prm.get("p") != query["p"]:
            problems.append(f"simplex extension for p={prm.get('p')}, query has p={query['p']}")
        if step.rule in (Rule.BILINEAR_LOWER, Rule.EMBEDDING_EXISTS):
            if prm.get("d") != d or prm.get("e") != query.get("embed_dim"):
                problems.append(
                    f"{step.rule} for (e={prm.get('e')}, d={prm.get('d')}), query has e={query.get('embed_dim')}, d={d}"
                )
            if step.rule == Rule.BILINEAR_LOWER and ell != d:
                problems.append(f"bilinear lower bound needs ell = d, query has ell={ell}, d={d}")
            if step.rule == Rule.EMBEDDING_EXISTS and prm.get("ell") != ell:
                problems.append(f"embedding step with ell={prm.get('ell')}, query has ell={ell}")
    return problems


def nonfaces_verified(cert: BoundCertificate, complex_: Optional[SimplicialComplex] = None) -> bool:
    """Whether replay ties the recorded nonfaces to an actual complex.

    That needs either an explicit complex or a simplex-boundary certificate,
    whose complex is rebuilt from ``p``.
    """
    if not any(s.rule == Rule.COLORING_BOUND for s in cert.derivation):
        return True
    return complex_ is not None or "p" in cert.query


def verify_certificate(cert: BoundCertificate, complex_: Optional[SimplicialComplex] = None, **kwargs: Any) -> bool:
    return not replay(cert, complex_, **kwargs)


def _replay_coloring_bound(step: DerivationStep, complex_: Optional[SimplicialComplex]) -> list[str]:
    prm = step.params
    n, c, d, ell, m = prm["n"], prm["c"], prm["d"], prm["ell"], prm["m"]
    problems = []
    if m != d - n + c + 2:
        problems.append(f"m={m} but d - n + c + 2 = {d - n + c + 2}")
    if not 0 <= m <= ell:
        problems.append(f"m={m} outside [0, ell={ell}]")
    elif not ones_disjoint(m, ell - m):
        problems.append(f"m={binary(m)} and ell-m={binary(ell - m)} share a 1-bit")
    if step.bound != m - 1:
        problems.append(f"bound {step.bound} != m - 1 = {m - 1}")
    if step.rule == Rule.SEPARATING_MAP_BOUND:
        return problems

    nonfaces = [frozenset(f) for f in prm["nonfaces"]]
    coloring = prm["coloring"]
    if len(coloring) != len(nonfaces):
        problems.append(f"{len(coloring)} colors for {len(nonfaces)} nonfaces")
    elif any(not 0 <= color < c for color in coloring):
        problems.append(f"coloring uses colors outside [0, {c})")
    else:
        for i in range(len(nonfaces)):
            for j in range(i + 1, len(nonfaces)):
                if coloring[i] == coloring[j] and nonfaces[i].isdisjoint(nonfaces[j]):
                    problems.append(f"disjoint nonfaces {sorted(nonfaces[i])} and {sorted(nonfaces[j])} share a color")
    if complex_ is not None:
        if complex_.n != n:
            problems.append(f"complex has {complex_.n} vertices, step records {n}")
        actual = [list(f.vertices) for f in complex_.minimal_nonfaces()]
        if actual != [sorted(f) for f in prm["nonfaces"]]:
            problems.append("recorded nonfaces are not the minimal nonfaces of the complex")
    return problems


def _replay_upper_transfer(step: DerivationStep, coloring_step: Optional[DerivationStep]) -> list[str]:
    if coloring_step is None:
        return ["no coloring bound precedes this step"]
    prm, base = step.params, coloring_step.params
    problems = []
    if step.bound != coloring_step.bound:
        problems.append(f"bound {step.bound} differs from the coloring bound {coloring_step.bound}")
    if step.rule == Rule.SIMPLEX_EXTENSION:
        if base["n"] != prm["p"] + 2 or base["c"] != 0:
            problems.append(f"coloring bound is not for the full simplex on p+2={prm['p'] + 2} vertices")
        return problems
    if prm["from_d"] > prm["to_d"] or base["d"] != prm["to_d"]:
        problems.append(f"monotone step {prm['from_d']} -> {prm['to_d']} does not reach d'={base['d']}")
    if step.rule == Rule.DIAGONAL_MONOTONE and base["ell"] != base["d"]:
        problems.append("diagonal step needs ell = d at the coloring bound")
    if step.rule == Rule.MONOTONE_D and base["ell"] != prm["ell"]:
        problems.append(f"fixed-ell step with ell={prm['ell']} but coloring bound used ell={base['ell']}")
    return problems


def _replay_bilinear(step: DerivationStep, trials: int, seed: int) -> list[str]:
    prm = step.params
    recipe = Construction.from_dict(prm["construction"])
    a, b, out = recipe.dims
    problems = []
    if prm.get("construction_id", recipe.label) != recipe.label:
        problems.append(f"construction id {prm['construction_id']} does not name {recipe.label}")
    if a < prm["e"] or b != prm["q"] + 1 or out > prm["d"] or step.bound != prm["q"]:
        problems.append(f"{recipe.label} with dims {recipe.dims} does not give q={prm['q']} for e={prm['e']}, d={prm['d']}")
    tensor = recipe.build()
    if tensor.dims != recipe.dims:
        problems.append(f"built tensor has dims {tensor.dims}, recipe claims {recipe.dims}")
    evidence = certify(recipe)
    if not evidence.passed:
        problems.append(f"{evidence.method} check fails for {recipe.base_label}")
    if not nonsingularity_probe(tensor, trials, seed):
        problems.append(f"nonsingularity probe fails for {recipe.label}")
    return problems
