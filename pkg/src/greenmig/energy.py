"""Server and datacenter power accounting, hosting capacity, and cost terms.

Power model: every server draws a static component (idle power plus the PUE
overhead) and a dynamic component linear in its CPU utilization. Brown energy
is whatever a DC draws beyond its per-cycle renewable budget. Costs are in
cents: energy priced per watt-cycle, migration priced per unit (Gbps moved or
lightpath used).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

NodeId = int | str


class CapacityError(RuntimeError):
    """A placement contract was violated (overfull server, unknown VM, ...)."""


@dataclass(frozen=True)
class PowerParams:
    """Server power envelope. Static and per-core figures are derived, never stored."""

    idle_w: float = 100.0
    peak_w: float = 200.0
    pue: float = 1.2
    count_idle_servers: bool = True  # idle servers are not turned off

    def __post_init__(self):
        if not self.peak_w > self.idle_w > 0:
            raise ValueError("need peak > idle > 0")
        if self.pue < 1:
            raise ValueError("PUE cannot be below 1")

    @property
    def static_w(self) -> float:
        return self.idle_w + (self.pue - 1.0) * self.peak_w

    def dynamic_per_core_w(self, cores_per_server: int) -> float:
        return (self.peak_w - self.idle_w) / cores_per_server


@dataclass
class VMRequest:
    """One user request: CPU cores to host it and bandwidth to migrate it."""

    id: str
    home_dc: NodeId
    cores: int
    bandwidth_gbps: float
    migrated_to: NodeId | None = None

    def __post_init__(self):
        if self.cores < 1:
            raise ValueError(f"VM {self.id}: cores must be >= 1")
        if self.bandwidth_gbps <= 0:
            raise ValueError(f"VM {self.id}: bandwidth must be positive")


@dataclass
class ServerState:
    used_cores: int = 0
    hosted_vms: set[str] = field(default_factory=set)


@dataclass
class Datacenter:
    """Mutable per-cycle DC state: servers, prices, and the renewable budget."""

    id: NodeId
    node: NodeId
    servers: list[ServerState]
    cores_per_server: int
    energy_price_cents: float
    migration_price_cents: float
    renewable_w: float
    pue: float

    @classmethod
    def build(cls, id: NodeId, node: NodeId, server_count: int, cores_per_server: int,
              energy_price_cents: float, migration_price_cents: float,
              renewable_w: float, pue: float) -> "Datacenter":
        if server_count < 1:
            raise ValueError("a DC needs at least one server")
        if renewable_w < 0:
            raise ValueError("renewable budget cannot be negative")
        return cls(id, node, [ServerState() for _ in range(server_count)],
                   cores_per_server, energy_price_cents, migration_price_cents,
                   renewable_w, pue)

    @property
    def server_count(self) -> int:
        return len(self.servers)

    @property
    def used_cores(self) -> int:
        return sum(s.used_cores for s in self.servers)

    @property
    def free_cores(self) -> int:
        return self.server_count * self.cores_per_server - self.used_cores

    def hosted_vm_ids(self) -> set[str]:
        out: set[str] = set()
        for s in self.servers:
            out |= s.hosted_vms
        return out


def server_power(params: PowerParams, used_cores: int, cores_per_server: int,
                 pue: float | None = None) -> float:
    """Power draw of one server in watts, affine in its used cores."""
    if not 0 <= used_cores <= cores_per_server:
        raise ValueError("used cores out of range")
    pue = params.pue if pue is None else pue
    static = params.idle_w + (pue - 1.0) * params.peak_w
    utilization = used_cores / cores_per_server
    return static + (params.peak_w - params.idle_w) * utilization


def dc_power(dc: Datacenter, params: PowerParams) -> float:
    """Total DC draw. All servers contribute static power unless configured otherwise."""
    static = params.idle_w + (dc.pue - 1.0) * params.peak_w
    per_core = params.dynamic_per_core_w(dc.cores_per_server)
    if params.count_idle_servers:
        static_total = static * dc.server_count
    else:
        static_total = static * sum(1 for s in dc.servers if s.used_cores > 0)
    return static_total + per_core * dc.used_cores


def brown_energy(dc: Datacenter, params: PowerParams) -> float:
    """Draw beyond the renewable budget, floored at zero."""
    return max(dc_power(dc, params) - dc.renewable_w, 0.0)


def renewable_headroom(dc: Datacenter, params: PowerParams) -> float:
    """Unused renewable watts, floored at zero."""
    return max(dc.renewable_w - dc_power(dc, params), 0.0)


def _ffd_order(vms: Iterable[VMRequest]) -> list[VMRequest]:
    return sorted(vms, key=lambda v: (-v.cores, v.id))


def can_host(dc: Datacenter, vms: Iterable[VMRequest]) -> bool:
    """First-fit-decreasing feasibility of adding these VMs to the current state."""
    loads = [s.used_cores for s in dc.servers]
    cap = dc.cores_per_server
    for vm in _ffd_order(vms):
        for i, load in enumerate(loads):
            if load + vm.cores <= cap:
                loads[i] = load + vm.cores
                break
        else:
            return False
    return True


def place_vms(dc: Datacenter, vms: Iterable[VMRequest]) -> dict[str, int]:
    """Place VMs by first-fit-decreasing (cores desc, id asc). Returns vm -> server index."""
    vm_list = list(vms)
    cores_of = {vm.id: vm.cores for vm in vm_list}
    placement: dict[str, int] = {}
    cap = dc.cores_per_server
    for vm in _ffd_order(vm_list):
        for i, server in enumerate(dc.servers):
            if server.used_cores + vm.cores <= cap:
                server.used_cores += vm.cores
                server.hosted_vms.add(vm.id)
                placement[vm.id] = i
                break
        else:
            # roll back: a placement call must be all-or-nothing
            for placed_id, idx in placement.items():
                dc.servers[idx].used_cores -= cores_of[placed_id]
                dc.servers[idx].hosted_vms.discard(placed_id)
            raise CapacityError(f"DC {dc.id}: VM {vm.id} ({vm.cores} cores) does not fit")
    return placement


def remove_vms(dc: Datacenter, vms: Iterable[VMRequest]) -> None:
    for vm in vms:
        for server in dc.servers:
            if vm.id in server.hosted_vms:
                server.hosted_vms.discard(vm.id)
                server.used_cores -= vm.cores
                if server.used_cores < 0:
                    raise CapacityError(f"DC {dc.id}: negative load removing {vm.id}")
                break
        else:
            raise CapacityError(f"DC {dc.id}: VM {vm.id} is not hosted here")


def brown_cost(dcs: Iterable[Datacenter] | Mapping[NodeId, Datacenter],
               params: PowerParams) -> float:
    """Total brown-energy cost in cents: sum of price * brown watts per DC."""
    if isinstance(dcs, Mapping):
        dcs = dcs.values()
    return sum(dc.energy_price_cents * brown_energy(dc, params) for dc in dcs)


def objective(dcs: Iterable[Datacenter] | Mapping[NodeId, Datacenter],
              params: PowerParams, batches: Iterable = ()) -> float:
    """Brown cost plus migration cost: per batch, the source DC's migration
    price times (bandwidth moved in Gbps + one unit for the lightpath)."""
    if isinstance(dcs, Mapping):
        dc_map = dict(dcs)
    else:
        dc_map = {dc.id: dc for dc in dcs}
    total = brown_cost(dc_map, params)
    for batch in batches:
        src = dc_map[batch.source_dc]
        total += src.migration_price_cents * (batch.theta_gbps + 1.0)
    return total
