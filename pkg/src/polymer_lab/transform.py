"""Walk surgeries: unfolding zigzags and stickbreaking between diamond times."""

from __future__ import annotations

from dataclasses import dataclass, field

from .decompose import diamond_times, is_bridge, renewal_times, zigzags
from .errors import NotAZigzag, NotDiamond
from .lattice import Walk, concatenate, reflect_x, rotate_xy_clockwise
from .model import Model, local_times, weight_sigma

WEIGHT_SLACK = 1e-12


def _splice(w: Walk, i: int, j: int, op) -> Walk:
    return concatenate(w.segment(0, i), op(w.segment(i, j)), w.segment(j, w.length))


def _unfold_unchecked(w: Walk, i: int, j: int) -> Walk:
    if i == j:
        return w
    return _splice(w, i, j, reflect_x)


def unfold(w: Walk, site: tuple[int, int]) -> Walk:
    """Reflect the segment between the ends of a zigzag; the rest is re-glued."""
    i, j = site
    if (i, j) not in zigzags(w):
        raise NotAZigzag(f"{site} is not a zigzag of the walk")
    return _unfold_unchecked(w, i, j)


def unfold_set(w: Walk, sites, order=None) -> Walk:
    """Unfold several zigzags of ``w`` one after another.

    Sites are validated against the zigzags of the original walk. The
    default order is increasing i; any other order gives the same walk.
    """
    sites = [tuple(s) for s in sites]
    valid = set(zigzags(w))
    bad = [s for s in sites if s not in valid]
    if bad:
        raise NotAZigzag(f"{bad} are not zigzags of the walk")
    for i, j in (sorted(sites) if order is None else [sites[k] for k in order]):
        w = _unfold_unchecked(w, i, j)
    return w


def stickbreak(w: Walk, di: int, dj: int) -> Walk:
    """Rotate the segment between two diamond times a quarter turn clockwise."""
    if di > dj:
        raise NotDiamond("need di <= dj")
    if di == dj:
        if di not in diamond_times(w):
            raise NotDiamond(f"{di} is not a diamond time")
        return w
    diamonds = set(diamond_times(w))
    if di not in diamonds or dj not in diamonds:
        raise NotDiamond(f"({di}, {dj}) are not both diamond times")
    return _splice(w, di, dj, rotate_xy_clockwise)


@dataclass
class SurgeryRecord:
    input: Walk
    output: Walk
    sites: tuple[int, int]
    kind: str
    checks: dict[str, bool] = field(default_factory=dict)
    info: dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _max_multiplicity(w: Walk) -> int:
    return max(local_times(w).values())


def surgery(w: Walk, kind: str, sites: tuple[int, int], model: Model | None = None,
            check: bool = False) -> SurgeryRecord:
    """Apply an unfolding or a stickbreaking and optionally audit its contracts.

    With ``check`` every property the surgery guarantees is re-verified on
    the output; weight-related checks need ``model``.
    """
    i, j = sites
    if kind == "unfold":
        out = unfold(w, (i, j))
    elif kind == "stickbreak":
        out = stickbreak(w, i, j)
    else:
        raise ValueError(f"unknown surgery {kind!r}")
    rec = SurgeryRecord(w, out, (i, j), kind)
    if not check:
        return rec
    c = rec.checks
    c["length_preserved"] = out.length == w.length
    if kind == "unfold":
        c["output_is_bridge"] = is_bridge(out)
        c["endpoint_x_monotone"] = int(out.end[0]) >= int(w.end[0])
        ren = set(renewal_times(out))
        c["sites_are_renewals"] = (i == j and i in ren) or (i in ren and j in ren)
        after = set(zigzags(out)) if c["output_is_bridge"] else set()
        c["zigzag_containment"] = all(z in after for z in zigzags(w) if z != (i, j))
        c["commutation"] = all(
            _unfold_unchecked(_unfold_unchecked(w, *z), i, j) == _unfold_unchecked(out, *z)
            for z in zigzags(w) if z != (i, j)
        )
        if model is not None:
            c["weight_monotone"] = (
                weight_sigma(out, model.phi, model.rho) >= weight_sigma(w, model.phi, model.rho) - WEIGHT_SLACK
            )
    else:
        rec.info["output_is_bridge"] = is_bridge(out)
        c["multiplicity_preserved"] = _max_multiplicity(out) == _max_multiplicity(w)
        if model is not None:
            a = weight_sigma(w, model.phi, model.rho)
            b = weight_sigma(out, model.phi, model.rho)
            c["weight_preserved"] = a == b or abs(a - b) <= WEIGHT_SLACK
    return rec
