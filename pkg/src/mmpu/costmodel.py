"""Bitlet-inspired throughput comparison of the mMPU against a CPU.

PIM throughput counts one element per row per trace, with a trace op
costing one cycle across every row of every array. CPU throughput is the
lower of a compute bound and a memory-bandwidth bound (a two-bound
roofline). These formulas are this package's own modelling choice.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields, replace

from .errors import ConfigError


@dataclass(frozen=True)
class PimConfig:
    arrays: float
    rows_per_array: float
    frequency: float  # Hz
    cycles_per_element: float
    transfer_cycles: float = 0.0  # optional data-movement overhead per element

    def __post_init__(self):
        for f in ("arrays", "rows_per_array", "frequency", "cycles_per_element"):
            if not getattr(self, f) > 0:
                raise ValueError(f"{f} must be positive")
        if self.transfer_cycles < 0:
            raise ValueError("transfer_cycles must be non-negative")


@dataclass(frozen=True)
class CpuConfig:
    ops_per_element: float
    compute_rate: float  # ops/s
    bytes_per_element: float
    bandwidth: float  # bytes/s

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")

    @property
    def compute_bound(self) -> float:
        return self.compute_rate / self.ops_per_element

    @property
    def bandwidth_bound(self) -> float:
        return self.bandwidth / self.bytes_per_element

    @property
    def is_bandwidth_bound(self) -> bool:
        return self.bandwidth_bound < self.compute_bound


def pim_throughput(cfg: PimConfig) -> float:
    """Elements per second."""
    return cfg.arrays * cfg.rows_per_array * cfg.frequency / (cfg.cycles_per_element + cfg.transfer_cycles)


def cpu_throughput(cfg: CpuConfig) -> float:
    return min(cfg.compute_bound, cfg.bandwidth_bound)


@dataclass(frozen=True)
class Verdict:
    pim_tput: float
    cpu_tput: float
    speedup: float
    beneficial: bool
    cpu_bandwidth_bound: bool
    break_even_bytes_per_element: float | None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_table(self) -> str:
        be = self.break_even_bytes_per_element
        rows = [
            ("PIM throughput (elem/s)", f"{self.pim_tput:.6g}"),
            ("CPU throughput (elem/s)", f"{self.cpu_tput:.6g}"),
            ("CPU regime", "bandwidth-bound" if self.cpu_bandwidth_bound else "compute-bound"),
            ("speedup (PIM/CPU)", f"{self.speedup:.6g}"),
            ("mMPU beneficial", "yes" if self.beneficial else "no"),
            ("break-even bytes/element", "n/a" if be is None else f"{be:.6g}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


def compare(pim: PimConfig, cpu: CpuConfig) -> Verdict:
    """PIM vs CPU verdict; beneficial only for a strict speedup.

    The break-even point is the ``bytes_per_element`` at which the CPU's
    bandwidth bound equals the PIM throughput. It exists only while the
    CPU's compute bound exceeds the PIM rate; otherwise the verdict is the
    same for every ``bytes_per_element`` and None is reported.
    """
    p = pim_throughput(pim)
    c = cpu_throughput(cpu)
    speedup = p / c
    break_even = None
    if cpu.compute_bound > p:
        break_even = cpu.bandwidth / p
    return Verdict(p, c, speedup, speedup > 1.0, cpu.is_bandwidth_bound, break_even)


_SWEEPABLE = {f.name: PimConfig for f in fields(PimConfig)} | {f.name: CpuConfig for f in fields(CpuConfig)}


def sweep(pim: PimConfig, cpu: CpuConfig, param: str, values) -> list[dict]:
    """Evaluate compare() while varying one config field."""
    if param not in _SWEEPABLE:
        raise ValueError(f"cannot sweep {param!r}; choose one of {sorted(_SWEEPABLE)}")
    out = []
    for v in values:
        if _SWEEPABLE[param] is PimConfig:
            verdict = compare(replace(pim, **{param: v}), cpu)
        else:
            verdict = compare(pim, replace(cpu, **{param: v}))
        out.append({param: v, **verdict.to_dict()})
    return out


def sweep_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def configs_from_json(text: str) -> tuple[PimConfig, CpuConfig]:
    """Parse ``{"pim": {...}, "cpu": {...}}``; unknown keys are rejected."""
    doc = json.loads(text)
    if not isinstance(doc, dict) or set(doc) - {"pim", "cpu"}:
        raise ConfigError("compare config must be an object with keys 'pim' and 'cpu'")
    out = []
    for key, cls in (("pim", PimConfig), ("cpu", CpuConfig)):
        section = doc.get(key, {})
        unknown = set(section) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown {key} key(s): {sorted(unknown)}")
        try:
            out.append(cls(**section))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from None
    return out[0], out[1]
