"""Problem data: sites, circuits, resources, JSON (de)serialization and
synthetic instance generation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources as _res
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

DEFAULT_SPEED_KMH = 80.0
DEFAULT_CLUSTER_KM = 80.0

Pair = Tuple[int, int]


class InstanceError(ValueError):
    """Raised when an instance document violates a data-model invariant."""


@dataclass(frozen=True)
class Site:
    id: int
    region: int
    coords: Tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Network:
    sites: Tuple[Site, ...]
    # unordered pairs stored as (s, t) with s < t
    pair_circuits: Dict[Pair, int]
    travel_minutes: Tuple[Tuple[int, ...], ...]

    def validate(self, num_regions: int) -> None:
        n = len(self.sites)
        if [s.id for s in self.sites] != list(range(n)):
            raise InstanceError("site ids must be 0..n-1 in order")
        for s in self.sites:
            if not 0 <= s.region < num_regions:
                raise InstanceError(f"site {s.id} has region {s.region} outside 0..{num_regions - 1}")
        for (s, t), phi in self.pair_circuits.items():
            if s == t:
                raise InstanceError(f"self-pair at site {s}")
            if not s < t:
                raise InstanceError(f"pair ({s},{t}) must be stored with s < t")
            if not (0 <= s < n and 0 <= t < n):
                raise InstanceError(f"pair ({s},{t}) references a missing site")
            if int(phi) != phi or phi < 1:
                raise InstanceError(f"pair ({s},{t}) must carry >= 1 circuits")
        T = self.travel_minutes
        if len(T) != n or any(len(row) != n for row in T):
            raise InstanceError("travel matrix must be n x n")
        for i in range(n):
            if T[i][i] != 0:
                raise InstanceError("travel matrix diagonal must be zero")
            for j in range(n):
                if T[i][j] != T[j][i]:
                    raise InstanceError("travel matrix not symmetric")
                if T[i][j] < 0 or int(T[i][j]) != T[i][j]:
                    raise InstanceError("travel times must be nonnegative integer minutes")


@dataclass(frozen=True)
class Resources:
    eta_tech: Tuple[int, ...]
    eta_cir: int
    eta_eng: int
    alpha_eng: int
    theta: int
    cost_tech: int
    cost_eng: int
    durations: Tuple[int, ...]
    num_windows: int

    def validate(self) -> None:
        if any(e < 0 for e in self.eta_tech) or min(self.eta_cir, self.eta_eng, self.num_windows) < 0:
            raise InstanceError("resource caps must be >= 0")
        if self.alpha_eng <= 0:
            raise InstanceError("alpha_eng must be positive")
        if self.theta <= 0:
            raise InstanceError("theta must be positive")
        if self.cost_tech < 0 or self.cost_eng < 0:
            raise InstanceError("hourly costs must be >= 0")
        d = self.durations
        if not d or any(x <= 0 for x in d) or any(a >= b for a, b in zip(d, d[1:])):
            raise InstanceError("durations must be nonempty, positive and strictly ascending")

    def combined_rate(self) -> Fraction:
        """Cents per hour of one shift, engineer share included."""
        return Fraction(self.cost_tech) + Fraction(self.cost_eng, self.alpha_eng)

    def shift_cost(self, duration: int) -> int:
        # exact for durations that make rate*duration/60 integral; half-up otherwise
        exact = self.combined_rate() * duration / 60
        return math.floor(exact + Fraction(1, 2))

    @property
    def max_shifts(self) -> int:
        return self.alpha_eng * self.eta_eng


@dataclass(frozen=True)
class Instance:
    network: Network
    resources: Resources
    name: str = "instance"

    def __post_init__(self):
        self.resources.validate()
        self.network.validate(len(self.resources.eta_tech))

    # -- derived indexing, cached on first use -------------------------------

    @cached_property
    def pairs(self) -> List[Pair]:
        return sorted(self.network.pair_circuits)

    @cached_property
    def phi(self) -> List[int]:
        return [self.network.pair_circuits[p] for p in self.pairs]

    @cached_property
    def pair_index(self) -> Dict[Pair, int]:
        return {p: i for i, p in enumerate(self.pairs)}

    @property
    def num_sites(self) -> int:
        return len(self.network.sites)

    @property
    def num_regions(self) -> int:
        return len(self.resources.eta_tech)

    @property
    def num_windows(self) -> int:
        return self.resources.num_windows

    @property
    def T(self) -> Tuple[Tuple[int, ...], ...]:
        return self.network.travel_minutes

    def region_of(self, s: int) -> int:
        return self.network.sites[s].region

    @cached_property
    def region_sites(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.num_regions)]
        for site in self.network.sites:
            out[site.region].append(site.id)
        return out

    @cached_property
    def sides(self) -> List[Tuple[int, int, int]]:
        """Endpoint sides as (site, other_site, pair_index).

        Side ``2p`` holds the endpoints of pair ``p`` at its lower site,
        side ``2p + 1`` those at its upper site.
        """
        out = []
        for p, (s, t) in enumerate(self.pairs):
            out.append((s, t, p))
            out.append((t, s, p))
        return out

    def side_of(self, site: int, other: int) -> int:
        s, t = (site, other) if site < other else (other, site)
        p = self.pair_index[(s, t)]
        return 2 * p if site == s else 2 * p + 1

    def is_intra(self, p: int) -> bool:
        s, t = self.pairs[p]
        return self.region_of(s) == self.region_of(t)

    @cached_property
    def region_sides(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.num_regions)]
        for k, (s, _, _) in enumerate(self.sides):
            out[self.region_of(s)].append(k)
        return out

    def total_endpoints(self) -> int:
        return 2 * sum(self.phi)

    def endpoints_per_site(self) -> List[int]:
        counts = [0] * self.num_sites
        for (s, t), phi in self.network.pair_circuits.items():
            counts[s] += phi
            counts[t] += phi
        return counts

    def shift_cost(self, duration: int) -> int:
        return self.resources.shift_cost(duration)

    def window_cost_cap(self) -> int:
        """Largest possible cost of one window's plan."""
        return self.resources.shift_cost(self.resources.durations[-1]) * self.resources.max_shifts

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        r = self.resources
        return {
            "name": self.name,
            "sites": [
                {"id": s.id, "region": s.region, "x_km": s.coords[0], "y_km": s.coords[1]}
                for s in self.network.sites
            ],
            "pairs": [{"s": s, "t": t, "circuits": self.network.pair_circuits[(s, t)]} for s, t in self.pairs],
            "travel_minutes": [list(row) for row in self.network.travel_minutes],
            "resources": {
                "eta_tech": list(r.eta_tech),
                "eta_cir": r.eta_cir,
                "eta_eng": r.eta_eng,
                "alpha_eng": r.alpha_eng,
                "theta_min": r.theta,
                "cost_tech_cph": r.cost_tech,
                "cost_eng_cph": r.cost_eng,
                "durations_min": list(r.durations),
                "windows": r.num_windows,
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise InstanceError(f"{what} must be an integer, got {value!r}")
    return int(value)


def instance_from_dict(doc: dict) -> Instance:
    try:
        site_docs = sorted(doc["sites"], key=lambda d: d["id"])
        sites = tuple(
            Site(_as_int(d["id"], "site id"), _as_int(d["region"], "region"),
                 (float(d.get("x_km", 0.0)), float(d.get("y_km", 0.0))))
            for d in site_docs
        )
        circuits: Dict[Pair, int] = {}
        for d in doc.get("pairs", []):
            s, t = _as_int(d["s"], "pair end"), _as_int(d["t"], "pair end")
            key = (min(s, t), max(s, t))
            if key in circuits:
                raise InstanceError(f"pair ({s},{t}) listed twice")
            circuits[key] = _as_int(d["circuits"], "circuits")
        if "travel_minutes" in doc and doc["travel_minutes"] is not None:
            travel = tuple(tuple(_as_int(x, "travel time") for x in row) for row in doc["travel_minutes"])
        else:
            coords = [s.coords for s in sites]
            travel = travel_matrix(coords)
        r = doc["resources"]
        res = Resources(
            eta_tech=tuple(_as_int(x, "eta_tech") for x in r["eta_tech"]),
            eta_cir=_as_int(r["eta_cir"], "eta_cir"),
            eta_eng=_as_int(r["eta_eng"], "eta_eng"),
            alpha_eng=_as_int(r["alpha_eng"], "alpha_eng"),
            theta=_as_int(r["theta_min"], "theta_min"),
            cost_tech=_as_int(r["cost_tech_cph"], "cost_tech_cph"),
            cost_eng=_as_int(r["cost_eng_cph"], "cost_eng_cph"),
            durations=tuple(_as_int(x, "duration") for x in r["durations_min"]),
            num_windows=_as_int(r["windows"], "windows"),
        )
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance document: {exc!r}") from exc
    return Instance(Network(sites, circuits, travel), res, name=str(doc.get("name", "instance")))


def load_instance(path) -> Instance:
    """Read and validate an instance JSON file.

    Raises ``json.JSONDecodeError`` on malformed JSON and ``InstanceError``
    when a data-model invariant fails.
    """
    with open(path) as fh:
        doc = json.load(fh)
    return instance_from_dict(doc)


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(instance.dumps())


# -- geometry ---------------------------------------------------------------

def travel_time(coords: Sequence[Tuple[float, float]], s: int, t: int,
                speed_kmh: float = DEFAULT_SPEED_KMH) -> int:
    """Driving minutes between two sites, rounded to the nearest minute."""
    if speed_kmh <= 0:
        raise ValueError("speed must be positive")
    if s == t:
        return 0
    (x1, y1), (x2, y2) = coords[s], coords[t]
    minutes = math.hypot(x1 - x2, y1 - y2) / speed_kmh * 60.0
    # half-up so 37.5 -> 38 in both directions
    return int(math.floor(minutes + 0.5))


def travel_matrix(coords, speed_kmh: float = DEFAULT_SPEED_KMH) -> Tuple[Tuple[int, ...], ...]:
    n = len(coords)
    return tuple(tuple(travel_time(coords, i, j, speed_kmh) for j in range(n)) for i in range(n))


def cluster_regions(coords: Sequence[Tuple[float, float]], threshold: float = DEFAULT_CLUSTER_KM) -> List[int]:
    """Quality-threshold clustering of planar points.

    Every remaining point seeds a candidate cluster grown greedily by the
    point that keeps the diameter smallest; the largest candidate (lowest
    seed on ties) is extracted and the process repeats. Regions are numbered
    by their smallest member.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    n = len(coords)
    if n == 0:
        raise ValueError("coords must be nonempty")
    pts = np.asarray(coords, dtype=float)
    dist = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    eps = 1e-9
    remaining = list(range(n))
    clusters: List[List[int]] = []
    while remaining:
        best: Optional[List[int]] = None
        for seed in remaining:
            members = [seed]
            # running max distance from each candidate to the current members
            reach = {j: dist[seed, j] for j in remaining if j != seed}
            while True:
                ok = [(d, j) for j, d in reach.items() if d <= threshold + eps]
                if not ok:
                    break
                _, j = min(ok)
                members.append(j)
                del reach[j]
                for k in reach:
                    reach[k] = max(reach[k], dist[j, k])
            if best is None or len(members) > len(best):
                best = members
        clusters.append(sorted(best))
        taken = set(best)
        remaining = [j for j in remaining if j not in taken]
    clusters.sort(key=min)
    region = [0] * n
    for r, members in enumerate(clusters):
        for j in members:
            region[j] = r
    return region


# -- generation -------------------------------------------------------------

@dataclass(frozen=True)
class Topology:
    """Site coordinates (km) and physical links of a base network."""

    name: str
    coords: Tuple[Tuple[float, float], ...]
    edges: Tuple[Pair, ...]
    site_names: Tuple[str, ...] = field(default=())

    def neighbours(self, s: int) -> List[int]:
        out = [b for a, b in self.edges if a == s] + [a for a, b in self.edges if b == s]
        return sorted(set(out))


def load_topology(path) -> Topology:
    doc = json.loads(Path(path).read_text())
    return _topology_from_dict(doc)


def _topology_from_dict(doc: dict) -> Topology:
    sites = sorted(doc["sites"], key=lambda d: d["id"])
    coords = tuple((float(d["x_km"]), float(d["y_km"])) for d in sites)
    edges = tuple(sorted((min(a, b), max(a, b)) for a, b in doc["edges"]))
    names = tuple(str(d.get("name", d["id"])) for d in sites)
    return Topology(str(doc.get("name", "topology")), coords, edges, names)


def eunetworks() -> Topology:
    """Bundled 15-site Western European backbone skeleton."""
    text = _res.files("netmigrate").joinpath("data/eunetworks.json").read_text()
    return _topology_from_dict(json.loads(text))


def lognormal_params(mean: float, std: float) -> Tuple[float, float]:
    """Underlying normal (mu, sigma) for a lognormal with the given moments."""
    var_ln = math.log1p((std / mean) ** 2)
    return math.log(mean) - var_ln / 2.0, math.sqrt(var_ln)


def generate_instance(
    topology: Topology,
    mu: float,
    sigma: float,
    seed: int,
    windows: int = 3,
    eta_cir: int = 30,
    *,
    eta_tech: int = 2,
    eta_eng: int = 3,
    alpha_eng: int = 5,
    theta: int = 20,
    cost_tech: int = 10800,
    cost_eng: int = 14000,
    durations: Sequence[int] = (360, 480),
    threshold_km: float = DEFAULT_CLUSTER_KM,
    speed_kmh: float = DEFAULT_SPEED_KMH,
    name: Optional[str] = None,
) -> Instance:
    """Sample a synthetic instance over ``topology``.

    Per-site endpoint targets are lognormal with the given mean and standard
    deviation. Circuits are placed by repeatedly taking the site with the
    largest residual target and pairing it with a uniformly drawn neighbour
    that still has residual demand.
    """
    if mu <= 0 or sigma <= 0:
        raise ValueError("mu and sigma must be positive")
    n = len(topology.coords)
    if n < 2 or not topology.edges:
        raise ValueError("topology needs >= 2 sites and >= 1 link")
    rng = np.random.default_rng(seed)
    m_ln, s_ln = lognormal_params(mu, sigma)
    draws = rng.lognormal(m_ln, s_ln, size=n)
    residual = [max(0, int(math.floor(x + 0.5))) for x in draws]

    circuits: Dict[Pair, int] = {}
    while max(residual) > 0:
        s = max(range(n), key=lambda i: (residual[i], -i))
        nbrs = topology.neighbours(s)
        others = [j for j in range(n) if j != s]
        for pool in ([j for j in nbrs if residual[j] > 0],
                     [j for j in others if residual[j] > 0],
                     nbrs,
                     others):
            if pool:
                t = pool[int(rng.integers(len(pool)))]
                break
        key = (min(s, t), max(s, t))
        circuits[key] = circuits.get(key, 0) + 1
        residual[s] -= 1
        residual[t] -= 1

    regions = cluster_regions(topology.coords, threshold_km)
    num_regions = max(regions) + 1
    sites = tuple(Site(i, regions[i], topology.coords[i]) for i in range(n))
    res = Resources(
        eta_tech=(eta_tech,) * num_regions,
        eta_cir=eta_cir,
        eta_eng=eta_eng,
        alpha_eng=alpha_eng,
        theta=theta,
        cost_tech=cost_tech,
        cost_eng=cost_eng,
        durations=tuple(durations),
        num_windows=windows,
    )
    net = Network(sites, circuits, travel_matrix(topology.coords, speed_kmh))
    return Instance(net, res, name=name or f"{topology.name}-mu{mu:g}-s{seed}")


def generate_tiny_instance(seed: int, *, max_sites: int = 6, max_circuits: int = 6,
                           max_windows: int = 2, infeasible: bool = False) -> Instance:
    """Small random instance for exhaustive cross-checks.

    Sites are scattered over a 200 km square and clustered into regions of
    at most four sites; shift lengths and migration times are short so
    that capacity, travel and staffing all bind. With ``infeasible`` one
    resource is cut so that no schedule exists: the per-window circuit cap,
    the technicians of a region that holds a circuit end, or (when some
    circuit crosses regions) the engineer cap down to one shift per window.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_sites + 1))
    while True:
        coords = [(float(rng.uniform(0, 200)), float(rng.uniform(0, 200))) for _ in range(n)]
        regions = cluster_regions(coords)
        if max(regions.count(r) for r in set(regions)) <= 4:
            break
    num_regions = max(regions) + 1
    all_pairs = [(s, t) for s in range(n) for t in range(s + 1, n)]
    total = int(rng.integers(1, max_circuits + 1))
    circuits: Dict[Pair, int] = {}
    for _ in range(total):
        key = all_pairs[int(rng.integers(len(all_pairs)))]
        circuits[key] = circuits.get(key, 0) + 1
    windows = int(rng.integers(1, max_windows + 1))
    eta_cir = int(rng.integers(max(1, -(-total // windows)), total + 1))
    theta = int(rng.choice([20, 30, 60, 90]))
    durations = [(120, 240), (240, 360), (360, 480), (240,), (180, 300, 420)][int(rng.integers(5))]
    eta_tech = [int(rng.integers(1, 3)) for _ in range(num_regions)]
    eta_eng = int(rng.integers(1, 4))
    alpha_eng = int(rng.choice([2, 3, 5]))
    if infeasible:
        cross = [k for k in sorted(circuits) if regions[k[0]] != regions[k[1]]]
        mode = int(rng.integers(3))
        if mode == 2 and cross:
            eta_eng, alpha_eng = 1, 1
        elif mode == 1:
            first = sorted(circuits)[0]
            eta_tech[regions[first[0]]] = 0
        else:
            eta_cir = (total - 1) // windows
    res = Resources(
        eta_tech=tuple(eta_tech),
        eta_cir=eta_cir,
        eta_eng=eta_eng,
        alpha_eng=alpha_eng,
        theta=theta,
        cost_tech=10800,
        cost_eng=14000,
        durations=tuple(durations),
        num_windows=windows,
    )
    sites = tuple(Site(i, regions[i], coords[i]) for i in range(n))
    return Instance(Network(sites, circuits, travel_matrix(coords)), res, name=f"tiny-{seed}")
