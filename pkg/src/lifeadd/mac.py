"""Event-driven MAC simulation: sleep-wake contention and baseline DCF.

Two modes for the sleep-wake MAC:

* renewal: the whole network advances cycle by cycle and every sleep timer
  re-arms at each cycle boundary (statistically identical to letting the
  residual timers run, by memorylessness).  Collisions happen only between
  mutually-sensing devices waking within the sensing window, wake-ups
  during ACK/timeout never transmit, and the congestion factor stays at 1.
  This reproduces the analytic cycle structure exactly and exists for
  formula validation.

* realistic: devices run independent timers.  Adds what the renewal model
  omits: hidden-terminal overlap collisions, transmissions started during
  an inaudible ACK failing at the AP, wake-ups during a timeout going
  ahead, and the timeout-doubling congestion factor.

The DCF baseline keeps its radio on permanently (idle-listening) and
contends with slotted binary exponential backoff.

Per-wake sensing inside a known-busy window is aggregated into one Poisson
draw for the wake count (each wake costs one sensing time of energy); the
first wake after the window is a fresh exponential by memorylessness, so
the aggregation is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyProfile
from .formulas import ContentionParams
from .kernel import (PRNG_ID, Event, EventKind, EventQueue, RandomStream,
                     ns_to_seconds, seconds_to_ns)
from .report import DeviceMetrics, SimReport
from .solver import assign_rates
from .topology import Topology

MAX_CONGESTION_FACTOR = 32
BEACON_PERIOD_S = 0.1
AP_STREAM_BASE = 1_000_000

LIFEADD = "lifeadd"
DCF = "dcf"
RENEWAL = "renewal"
REALISTIC = "realistic"


class NoBeacon(ValueError):
    """A device received no beacon to derive its sleep rate from."""


@dataclass(frozen=True)
class BeaconPayload:
    """Water level and total rate an AP advertises to nearby devices."""

    ap: int
    c_star: float
    y_star: float


def device_rate_selection(beacons, efficiency: float) -> float:
    """Sleep rate a device adopts: the smallest suggestion it hears.

    Each beacon yields min(efficiency, c_star) * y_star; taking the
    minimum makes the device defer to the most contended AP around it.
    """
    rates = [min(efficiency, b.c_star) * b.y_star for b in beacons]
    if not rates:
        raise NoBeacon("device heard no beacon")
    return min(rates)


def ap_gather_and_broadcast(ap: int, topology: Topology, efficiencies,
                            params: ContentionParams,
                            include=None) -> BeaconPayload:
    """Solve the rate assignment over every device the AP can hear.

    ``efficiencies`` covers all devices in the topology; ``include``
    optionally masks devices (e.g. dead or legacy ones) out of the
    gathering.
    """
    members = [int(d) for d in topology.devices_heard_by(ap)
               if include is None or include[d]]
    if not members:
        raise NoBeacon(f"AP {ap} hears no participating device")
    assignment = assign_rates([efficiencies[d] for d in members], params)
    return BeaconPayload(ap, assignment.c_star, assignment.y_star)


@dataclass
class DcfParams:
    slot_s: float = 20e-6
    difs_s: float = 50e-6
    cw_min: int = 31
    cw_max: int = 1023


@dataclass
class _Transmission:
    device: int
    ap: int
    start: int
    end: int
    # (other_device, other_start) for every transmission overlapping this
    # one; populated when either transmission starts.
    overlaps: list[tuple[int, int]] = field(default_factory=list)
    ack_overlap: bool = False   # own AP transmitted an ACK over this


@dataclass
class _Ack:
    ap: int
    device: int
    start: int
    end: int


class _Device:
    """Mutable per-device simulation state and accounting."""

    def __init__(self, idx: int, mac: str, profile: EnergyProfile,
                 efficiency: float, alpha: float, stream: RandomStream):
        self.idx = idx
        self.mac = mac
        self.profile = profile
        self.efficiency = efficiency
        self.alpha = alpha
        self.stream = stream
        self.alive = True
        self.battery = profile.initial_energy
        self.last_drain_ns = 0
        self.death_ns: int | None = None
        # sleep-wake state
        self.assigned_rate = 0.0
        self.initial_rate = 0.0
        self.congestion_factor = 1
        self.per_ap_rate: dict[int, float] = {}
        self.current_tx: _Transmission | None = None
        self.tx_is_success = False
        # DCF state
        self.cw = 0
        self.residual_slots = 0
        self.countdown_start_ns = 0
        self.backoff_interrupted = False
        self.backoff_end_ns: int | None = None
        self.pending_decision = False
        # accounting
        self.on_time_ns = 0
        self.tx_success = 0
        self.tx_collision = 0
        self.success_air_ns = 0
        self.rate_integral = 0.0    # integral of effective rate over time
        self.rate_mark_ns = 0

    @property
    def effective_rate(self) -> float:
        return self.assigned_rate / self.congestion_factor

    def mark_rate(self, now_ns: int) -> None:
        """Fold the running effective rate into its time integral."""
        self.rate_integral += self.effective_rate * ns_to_seconds(
            now_ns - self.rate_mark_ns)
        self.rate_mark_ns = now_ns


class Simulation:
    """One deterministic run; usually driven via run_config()."""

    def __init__(self, topology: Topology, profiles: list[EnergyProfile],
                 efficiencies, alphas, macs: list[str],
                 params: ContentionParams, duration_s: float, seed: int,
                 mode: str = REALISTIC, dcf: DcfParams | None = None,
                 packet_sampler=None, beacon_period_s: float = BEACON_PERIOD_S,
                 trace=None):
        self.topology = topology
        self.params = params
        self.mode = mode
        self.dcf = dcf or DcfParams()
        self.seed = seed
        self.duration_ns = seconds_to_ns(duration_s)
        self.packet_sampler = packet_sampler
        self.beacon_period_ns = seconds_to_ns(beacon_period_s)
        self.trace = trace

        self.ts_ns = seconds_to_ns(params.sensing_time)
        self.packet_ns = seconds_to_ns(params.packet_time)
        self.ack_ns = seconds_to_ns(params.ack_time)

        self.queue = EventQueue()
        self.devices = [
            _Device(i, macs[i], profiles[i], float(efficiencies[i]),
                    float(alphas[i]), RandomStream(seed, i))
            for i in range(topology.n_devices)
        ]
        self.ap_streams = [RandomStream(seed, AP_STREAM_BASE + a)
                           for a in range(topology.n_aps)]
        self.active_tx: list[_Transmission] = []
        self.active_acks: list[_Ack] = []
        self.ap_beacons: dict[int, BeaconPayload] = {}
        self.ap_members: dict[int, tuple[int, ...]] = {}
        self.membership_dirty = False

        if mode == RENEWAL:
            if any(d.mac != LIFEADD for d in self.devices):
                raise ValueError("renewal mode requires every AP on lifeadd")
            sensing = self.topology.device_senses_device
            n = self.topology.n_devices
            if n > 1 and not sensing[~np.eye(n, dtype=bool)].all():
                raise ValueError(
                    "renewal mode requires all devices to sense each other")

    # -- energy ---------------------------------------------------------

    def _drain(self, dev: _Device, now_ns: int) -> None:
        """Apply wall-clock battery drain since the last update."""
        if not dev.alive or now_ns <= dev.last_drain_ns:
            return
        dt = ns_to_seconds(now_ns - dev.last_drain_ns)
        rate = dev.profile.base_power - dev.profile.recharge_rate
        if dev.mac == DCF:
            rate += dev.profile.radio_on_power  # idle-listening: always on
        level = dev.battery - rate * dt
        if level <= 0.0 and rate > 0:
            overshoot = -level
            dev.death_ns = now_ns - seconds_to_ns(overshoot / rate)
            self._kill(dev)
            return
        dev.battery = min(max(level, 0.0), dev.profile.battery_capacity)
        dev.last_drain_ns = now_ns

    def _charge_radio(self, dev: _Device, now_ns: int, on_seconds: float,
                      window_start_ns: int | None = None) -> None:
        """Charge radio-on energy accrued up to now (sleep-wake only)."""
        if not dev.alive:
            return
        self._drain(dev, now_ns)
        if not dev.alive:
            return
        dev.on_time_ns += seconds_to_ns(on_seconds)
        dev.battery -= dev.profile.radio_on_power * on_seconds
        if dev.battery <= 0.0:
            # Died inside the charged window; place the death where the
            # combined drain crosses zero when the window is known.
            total = (dev.profile.radio_on_power + dev.profile.base_power
                     - dev.profile.recharge_rate)
            if window_start_ns is not None and total > 0:
                undershoot = -dev.battery
                dev.death_ns = max(window_start_ns,
                                   now_ns - seconds_to_ns(undershoot / total))
            else:
                dev.death_ns = now_ns
            self._kill(dev)

    def _kill(self, dev: _Device) -> None:
        dev.mark_rate(dev.death_ns if dev.death_ns is not None
                      else self.queue.now)
        dev.battery = 0.0
        dev.alive = False
        self.membership_dirty = True
        self._emit_trace(dev.death_ns or self.queue.now, "dead", dev.idx, "")

    # -- channel --------------------------------------------------------

    def _sensed_busy_until(self, dev: _Device, now_ns: int,
                           include_blind: bool) -> int | None:
        """Latest end among busy sources the device senses, or None if idle.

        A data transmission counts when it started at least the sensing
        time ago (more recent starts are undetectable); ACKs count the
        same way.  ``include_blind`` widens the check to sources of any
        age (used by the DCF defer decision, which models continuous
        listening rather than a one-shot sense).
        """
        margin = 0 if include_blind else self.ts_ns
        busy_until = None
        sens_dd = self.topology.device_senses_device
        for tx in self.active_tx:
            if tx.device == dev.idx or tx.end <= now_ns:
                continue
            if sens_dd[dev.idx, tx.device] and tx.start + margin <= now_ns:
                busy_until = max(busy_until or 0, tx.end)
        if self.mode == REALISTIC or dev.mac == DCF:
            sens_da = self.topology.device_senses_ap
            for ack in self.active_acks:
                if ack.end <= now_ns or ack.device == dev.idx:
                    continue
                if sens_da[dev.idx, ack.ap] and ack.start + margin <= now_ns:
                    busy_until = max(busy_until or 0, ack.end)
        return busy_until

    def _packet_ns(self, dev: _Device) -> int:
        if self.packet_sampler is None:
            return self.packet_ns
        return seconds_to_ns(self.packet_sampler(dev))

    def _begin_transmission(self, dev: _Device, now_ns: int) -> None:
        length = self._packet_ns(dev)
        tx = _Transmission(dev.idx, int(self.topology.associated_ap[dev.idx]),
                           now_ns, now_ns + length)
        for other in self.active_tx:
            if other.end > now_ns:
                other.overlaps.append((dev.idx, now_ns))
                tx.overlaps.append((other.device, other.start))
        if self.mode == REALISTIC or dev.mac == DCF:
            for ack in self.active_acks:
                if ack.ap == tx.ap and ack.end > now_ns:
                    tx.ack_overlap = True
            self._interrupt_dcf_countdowns(
                now_ns, sensed_by=lambda d: self.topology
                .device_senses_device[d, dev.idx],
                source_is_dcf=dev.mac == DCF)
        self.active_tx.append(tx)
        dev.current_tx = tx
        self.queue.schedule(tx.end, EventKind.TX_END, device=dev.idx)
        self._emit_trace(now_ns, "tx_start", dev.idx, f"ap={tx.ap}")

    def _evaluate_transmission(self, tx: _Transmission) -> bool:
        """True when the AP decodes the packet (no qualifying interferer).

        Mutually-sensing transmitters collide when their starts fall in the
        same vulnerability window: the carrier-sensing time, widened to one
        backoff slot between two DCF stations (slotted countdowns tie at
        slot granularity, which a continuous-time model cannot reproduce
        with the bare sensing window).
        """
        dev = self.devices[tx.device]
        interferes = self.topology.interferes_at
        senses = self.topology.device_senses_device
        hidden_collides = self.mode == REALISTIC or dev.mac == DCF
        slot_ns = seconds_to_ns(self.dcf.slot_s)
        for other_dev, other_start in tx.overlaps:
            if not interferes[other_dev, tx.ap]:
                continue
            if senses[tx.device, other_dev]:
                window = (slot_ns if dev.mac == DCF
                          and self.devices[other_dev].mac == DCF
                          else self.ts_ns)
                if abs(other_start - tx.start) < window:
                    return False
            elif hidden_collides:
                return False
        if tx.ack_overlap:
            return False
        return True

    def _prune_channel(self, now_ns: int) -> None:
        self.active_tx = [t for t in self.active_tx if t.end > now_ns]
        self.active_acks = [a for a in self.active_acks if a.end > now_ns]

    # -- sleep-wake device ---------------------------------------------

    def _schedule_wake(self, dev: _Device, from_ns: int) -> None:
        delay = dev.stream.exponential(dev.effective_rate)
        self.queue.schedule(from_ns + seconds_to_ns(delay),
                            EventKind.WAKE, device=dev.idx)

    def _sleep_through_busy(self, dev: _Device, now_ns: int,
                            busy_until: int) -> None:
        """Aggregate every wake inside a known-busy window.

        The device wakes, senses busy, sleeps, possibly several times; the
        number of further wakes in the window is Poisson with mean
        rate*window and each costs one sensing time of energy.  The first
        wake after the window is a fresh exponential by memorylessness.
        """
        window_ns = busy_until - (now_ns + self.ts_ns)
        extra = 0
        if window_ns > 0:
            extra = dev.stream.poisson(
                dev.effective_rate * ns_to_seconds(window_ns))
        anchor = max(busy_until, now_ns + self.ts_ns)
        self._charge_radio(dev, anchor,
                           (1 + extra) * self.params.sensing_time)
        if dev.alive:
            self._schedule_wake(dev, anchor)

    def _on_wake(self, dev: _Device, now_ns: int) -> None:
        if not dev.alive or dev.current_tx is not None:
            return
        self._drain(dev, now_ns)
        if not dev.alive:
            return
        busy_until = self._sensed_busy_until(dev, now_ns, include_blind=False)
        if busy_until is not None:
            self._sleep_through_busy(dev, now_ns, busy_until)
        else:
            self._begin_transmission(dev, now_ns)

    def _on_tx_end(self, dev: _Device, now_ns: int) -> None:
        tx = dev.current_tx
        if tx is None:
            return
        success = self._evaluate_transmission(tx)
        dev.tx_is_success = success
        if success:
            ack = _Ack(tx.ap, dev.idx, now_ns, now_ns + self.ack_ns)
            self.active_acks.append(ack)
            for other in self.active_tx:
                if other is not tx and other.ap == tx.ap and other.end > now_ns:
                    other.ack_overlap = True
            self._interrupt_dcf_countdowns(
                now_ns, sensed_by=lambda d: self.topology
                .device_senses_ap[d, tx.ap],
                source_is_dcf=False)
            self.queue.schedule(now_ns + self.ack_ns, EventKind.ACK_END,
                                device=dev.idx, ap=tx.ap)
        else:
            self.queue.schedule(now_ns + self.ack_ns, EventKind.TIMEOUT,
                                device=dev.idx, ap=tx.ap)

    def _on_attempt_done(self, dev: _Device, now_ns: int) -> None:
        """Shared ACK/timeout completion: energy, counters, next action."""
        tx = dev.current_tx
        if tx is None:
            return
        dev.current_tx = None
        air_ns = tx.end - tx.start
        success = dev.tx_is_success
        if success:
            dev.tx_success += 1
            dev.success_air_ns += air_ns
        else:
            dev.tx_collision += 1
        if dev.mac == LIFEADD:
            self._charge_radio(
                dev, now_ns, ns_to_seconds(air_ns + self.ack_ns),
                window_start_ns=tx.start)
            if self.mode == REALISTIC:
                dev.mark_rate(now_ns)
                if success:
                    dev.congestion_factor = 1
                else:
                    dev.congestion_factor = min(
                        dev.congestion_factor * 2, MAX_CONGESTION_FACTOR)
            self._emit_trace(now_ns, "ack" if success else "timeout",
                             dev.idx, f"F={dev.congestion_factor}")
            if dev.alive:
                self._schedule_wake(dev, now_ns)
        else:
            self._drain(dev, now_ns)
            dev.on_time_ns += air_ns + self.ack_ns
            self._dcf_redraw(dev, success)
            self._emit_trace(now_ns, "ack" if success else "timeout",
                             dev.idx, f"cw={dev.cw}")
            if dev.alive:
                self._dcf_decide(dev, now_ns)

    # -- DCF device -------------------------------------------------------

    def _interrupt_dcf_countdowns(self, now_ns: int, sensed_by,
                                  source_is_dcf: bool) -> None:
        """Freeze DCF countdowns when a sensed source keys up.

        The slots completed before the interruption are consumed from the
        residual, as in binary exponential backoff.  A countdown ending
        inside the blind window keeps running (the station cannot detect
        the new source in time) and will usually produce a collision; the
        blind window is one slot between two DCF stations, since their
        post-busy countdowns share slot boundaries.
        """
        slot_ns = seconds_to_ns(self.dcf.slot_s)
        difs_ns = seconds_to_ns(self.dcf.difs_s)
        for other in self.devices:
            if (other.mac != DCF or not other.alive
                    or other.backoff_end_ns is None
                    or other.backoff_interrupted or other.pending_decision
                    or not sensed_by(other.idx)):
                continue
            blind = slot_ns if source_is_dcf else self.ts_ns
            if other.backoff_end_ns < now_ns + blind:
                continue
            elapsed = now_ns - (other.countdown_start_ns + difs_ns)
            consumed = max(0, elapsed // slot_ns) if elapsed > 0 else 0
            other.residual_slots = max(0, other.residual_slots - int(consumed))
            other.backoff_interrupted = True

    def _dcf_redraw(self, dev: _Device, success: bool) -> None:
        if success:
            dev.cw = self.dcf.cw_min
        else:
            dev.cw = min(2 * (dev.cw + 1) - 1, self.dcf.cw_max)
        dev.residual_slots = dev.stream.integers(0, dev.cw)

    def _dcf_decide(self, dev: _Device, now_ns: int) -> None:
        busy_until = self._sensed_busy_until(dev, now_ns, include_blind=True)
        if busy_until is not None:
            dev.pending_decision = True
            dev.backoff_end_ns = None
            self.queue.schedule(busy_until, EventKind.BACKOFF_END,
                                device=dev.idx)
            return
        wait_ns = seconds_to_ns(self.dcf.difs_s
                                + dev.residual_slots * self.dcf.slot_s)
        dev.pending_decision = False
        dev.backoff_interrupted = False
        dev.countdown_start_ns = now_ns
        dev.backoff_end_ns = now_ns + wait_ns
        self.queue.schedule(dev.backoff_end_ns, EventKind.BACKOFF_END,
                            device=dev.idx)

    def _on_backoff_end(self, dev: _Device, now_ns: int) -> None:
        if not dev.alive or dev.current_tx is not None:
            return
        self._drain(dev, now_ns)
        if not dev.alive:
            return
        if dev.pending_decision:
            self._dcf_decide(dev, now_ns)
            return
        if dev.backoff_end_ns != now_ns:
            return  # superseded by a newer countdown
        dev.backoff_end_ns = None
        if dev.backoff_interrupted:
            self._dcf_decide(dev, now_ns)
            return
        self._begin_transmission(dev, now_ns)

    # -- beacons / rate control ------------------------------------------

    def _gather_members(self, ap: int) -> tuple[int, ...]:
        return tuple(
            int(d) for d in self.topology.devices_heard_by(ap)
            if self.devices[d].alive and self.devices[d].mac == LIFEADD)

    def _recompute_beacon(self, ap: int) -> None:
        members = self._gather_members(ap)
        if not members:
            self.ap_beacons.pop(ap, None)
            self.ap_members[ap] = members
            return
        if self.ap_members.get(ap) == members and ap in self.ap_beacons:
            return
        assignment = assign_rates(
            [self.devices[d].efficiency for d in members], self.params)
        self.ap_beacons[ap] = BeaconPayload(ap, assignment.c_star,
                                            assignment.y_star)
        self.ap_members[ap] = members

    def _broadcast(self, ap: int, now_ns: int) -> None:
        payload = self.ap_beacons.get(ap)
        if payload is None:
            return
        for d in self.topology.devices_heard_by(ap):
            dev = self.devices[int(d)]
            if not dev.alive or dev.mac != LIFEADD:
                continue
            dev.per_ap_rate[ap] = min(dev.efficiency,
                                      payload.c_star) * payload.y_star
            new_rate = min(dev.per_ap_rate.values())
            if new_rate != dev.assigned_rate:
                dev.mark_rate(now_ns)
                dev.assigned_rate = new_rate

    def _on_beacon(self, ap: int, now_ns: int) -> None:
        if self.membership_dirty:
            for a in range(self.topology.n_aps):
                self._recompute_beacon(a)
            self.membership_dirty = False
        self._broadcast(ap, now_ns)
        self.queue.schedule(now_ns + self.beacon_period_ns, EventKind.BEACON,
                            ap=ap)

    def _initial_rates(self) -> None:
        for ap in range(self.topology.n_aps):
            self._recompute_beacon(ap)
        for dev in self.devices:
            if dev.mac != LIFEADD:
                continue
            beacons = [self.ap_beacons[int(a)]
                       for a in self.topology.beacon_sources(dev.idx)
                       if int(a) in self.ap_beacons]
            dev.assigned_rate = device_rate_selection(beacons, dev.efficiency)
            dev.initial_rate = dev.assigned_rate
            for b in beacons:
                dev.per_ap_rate[b.ap] = min(dev.efficiency,
                                            b.c_star) * b.y_star

    # -- renewal-mode cycle engine ----------------------------------------

    def _on_cycle_start(self, now_ns: int) -> None:
        alive = [d for d in self.devices if d.alive]
        if not alive:
            return
        draws = {d.idx: d.stream.exponential(d.effective_rate) for d in alive}
        first = min(draws.values())
        first_ns = seconds_to_ns(first)
        transmitters = [d for d in alive
                        if seconds_to_ns(draws[d.idx]) < first_ns + self.ts_ns]
        success = len(transmitters) == 1
        busy_ns = self.packet_ns + self.ack_ns
        boundary = now_ns + first_ns + busy_ns

        for d in transmitters:
            if success:
                d.tx_success += 1
                d.success_air_ns += self.packet_ns
                self._emit_trace(now_ns + first_ns, "tx_start", d.idx, "ok")
            else:
                d.tx_collision += 1
                self._emit_trace(now_ns + first_ns, "tx_start", d.idx,
                                 "collision")
            self._charge_radio(d, boundary,
                               ns_to_seconds(busy_ns),
                               window_start_ns=now_ns + first_ns)
        for d in alive:
            if d in transmitters or not d.alive:
                continue
            wake_ns = seconds_to_ns(draws[d.idx])
            if wake_ns >= first_ns + busy_ns:
                self._drain(d, boundary)
                continue
            window = (first_ns + busy_ns) - wake_ns
            extra = d.stream.poisson(
                d.effective_rate * ns_to_seconds(window))
            self._charge_radio(d, boundary,
                               (1 + extra) * self.params.sensing_time)
        if boundary < self.duration_ns and any(d.alive for d in self.devices):
            self.queue.schedule(boundary, EventKind.CYCLE_START)

    # -- main loop ---------------------------------------------------------

    def _emit_trace(self, time_ns: int, kind: str, device, detail: str) -> None:
        if self.trace is not None:
            self.trace.write(f"{time_ns}\t{kind}\t{device}\t{detail}\n")

    def run(self) -> SimReport:
        self._initial_rates()
        if self.mode == RENEWAL:
            self.queue.schedule(0, EventKind.CYCLE_START)
        else:
            for dev in self.devices:
                if dev.mac == LIFEADD:
                    self._schedule_wake(dev, 0)
                else:
                    dev.cw = self.dcf.cw_min
                    dev.residual_slots = dev.stream.integers(0, dev.cw)
                    self._dcf_decide(dev, 0)
            for ap in range(self.topology.n_aps):
                if self._gather_members(ap):
                    self.queue.schedule(self.beacon_period_ns,
                                        EventKind.BEACON, ap=ap)

        while True:
            event = self.queue.next()
            if event.kind == EventKind.END_OF_SIM or event.time >= self.duration_ns:
                break
            self._dispatch(event)
            self._prune_channel(event.time)
        return self._build_report()

    def _dispatch(self, event: Event) -> None:
        now = event.time
        if event.kind == EventKind.WAKE:
            self._on_wake(self.devices[event.device], now)
        elif event.kind == EventKind.TX_END:
            self._on_tx_end(self.devices[event.device], now)
            self._emit_trace(now, "tx_end", event.device, "")
        elif event.kind in (EventKind.ACK_END, EventKind.TIMEOUT):
            self._on_attempt_done(self.devices[event.device], now)
        elif event.kind == EventKind.BACKOFF_END:
            self._on_backoff_end(self.devices[event.device], now)
        elif event.kind == EventKind.BEACON:
            self._on_beacon(event.ap, now)
        elif event.kind == EventKind.CYCLE_START:
            self._on_cycle_start(now)

    # -- reporting ----------------------------------------------------------

    def _build_report(self) -> SimReport:
        duration_s = ns_to_seconds(self.duration_ns)
        rows = []
        for dev in self.devices:
            if dev.alive:
                self._drain(dev, self.duration_ns)
            if dev.alive:
                dev.mark_rate(self.duration_ns)
            alive_ns = (dev.death_ns if dev.death_ns is not None
                        else self.duration_ns)
            alive_s = max(ns_to_seconds(alive_ns), 1e-12)
            if dev.mac == DCF:
                on_fraction = 1.0  # idle-listening: on whenever alive
            else:
                on_fraction = ns_to_seconds(dev.on_time_ns) / alive_s
            lifetime = self._lifetime(dev, alive_s)
            rows.append(DeviceMetrics(
                device_id=str(dev.idx),
                mac=dev.mac,
                throughput_bps=dev.alpha * ns_to_seconds(dev.success_air_ns)
                / duration_s,
                radio_on_fraction=on_fraction,
                lifetime_s=lifetime,
                tx_success=dev.tx_success,
                tx_collision=dev.tx_collision,
                assigned_rate_hz=dev.initial_rate,
                mean_effective_rate_hz=dev.rate_integral / alive_s,
            ))
        report = SimReport(mode=self.mode, seed=self.seed, devices=rows,
                           prng=PRNG_ID, duration_s=duration_s)
        return report.finalize()

    def _lifetime(self, dev: _Device, alive_s: float) -> float:
        if dev.death_ns is not None:
            return ns_to_seconds(dev.death_ns)
        # Survived the run: extrapolate from the measured mean drain.
        if dev.mac == DCF:
            net = (dev.profile.radio_on_power + dev.profile.base_power
                   - dev.profile.recharge_rate)
        else:
            on_frac = ns_to_seconds(dev.on_time_ns) / alive_s
            net = (dev.profile.radio_on_power * on_frac
                   + dev.profile.base_power - dev.profile.recharge_rate)
        if net <= 0:
            return math.inf
        return ns_to_seconds(self.duration_ns) + dev.battery / net


def select_rates(topology: Topology, efficiencies,
                 params: ContentionParams) -> tuple[list[float],
                                                    dict[int, BeaconPayload]]:
    """Static rate selection: per-AP assignments, then per-device minimum."""
    payloads = {ap: ap_gather_and_broadcast(ap, topology, efficiencies, params)
                for ap in range(topology.n_aps)}
    rates = [
        device_rate_selection(
            [payloads[int(a)] for a in topology.beacon_sources(d)],
            float(efficiencies[d]))
        for d in range(topology.n_devices)
    ]
    return rates, payloads


def run_scenario_components(topology, profiles, efficiencies, alphas, macs,
                            params, duration_s, seed, mode=REALISTIC,
                            dcf=None, packet_sampler=None,
                            beacon_period_s=BEACON_PERIOD_S,
                            trace=None) -> SimReport:
    """Run one simulation from already-built components."""
    sim = Simulation(topology, profiles, efficiencies, alphas, macs, params,
                     duration_s, seed, mode=mode, dcf=dcf,
                     packet_sampler=packet_sampler,
                     beacon_period_s=beacon_period_s, trace=trace)
    return sim.run()


def run_config(config, seed: int | None = None, mode: str | None = None,
               mac_override: str | None = None, trace=None) -> SimReport:
    """Run a parsed scenario, optionally overriding seed, mode, or MAC."""
    topology = config.build_topology()
    report = run_scenario_components(
        topology=topology,
        profiles=config.profiles(),
        efficiencies=config.efficiencies(),
        alphas=config.alphas(),
        macs=config.device_macs(topology, mac_override),
        params=config.contention,
        duration_s=config.duration_s,
        seed=config.seed if seed is None else seed,
        mode=mode or config.mode,
        dcf=DcfParams(**config.dcf) if config.dcf else None,
        packet_sampler=config.packet_sampler(),
        beacon_period_s=config.beacon_period_s,
        trace=trace,
    )
    ids = config.device_ids()
    for i, row in enumerate(report.devices):
        row.device_id = ids[i]
    return report


def run_lifeadd(config, seed: int | None = None,
                mode: str | None = None, trace=None) -> SimReport:
    """Run the scenario with every AP on the sleep-wake MAC."""
    return run_config(config, seed=seed, mode=mode, mac_override=LIFEADD,
                      trace=trace)


def run_baseline_dcf(config, seed: int | None = None, trace=None) -> SimReport:
    """Run the scenario with every AP on the idle-listening DCF baseline."""
    return run_config(config, seed=seed, mode=REALISTIC, mac_override=DCF,
                      trace=trace)
