"""Encounter-log ingestion: CSV parsing, deduplication, time segmentation and
a seeded synthetic log generator.

A log is a flat table with one row per (provider, encounter) participation::

    encounter_id,provider_id,role,day_index,phase,complication_count
    I000001,sur-0004,surgeon,12,intra,0

Encounters are keyed by ``(encounter_id, phase)``; intra- and postoperative
logs may reuse ids.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Mapping, NamedTuple

import numpy as np

from opgraph.errors import IngestError

log = logging.getLogger(__name__)

COLUMNS = ("encounter_id", "provider_id", "role", "day_index", "phase", "complication_count")


class Role(str, Enum):
    SURGEON = "surgeon"
    ANESTHESIOLOGIST = "anesthesiologist"
    NURSE = "nurse"
    PHYSICIAN = "physician"
    OTHER = "other"

    def __str__(self) -> str:
        return self.value


class Phase(str, Enum):
    INTRA = "intra"
    POST = "post"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class EventRecord:
    encounter_id: str
    provider_id: str
    role: Role
    day_index: int
    phase: Phase
    complication_count: int

    def __post_init__(self):
        if self.day_index < 0:
            raise IngestError(f"day_index must be >= 0, got {self.day_index}")
        if self.complication_count < 0:
            raise IngestError(
                f"complication_count must be >= 0, got {self.complication_count}"
            )

    @property
    def encounter_key(self) -> tuple[str, Phase]:
        return (self.encounter_id, self.phase)

    def as_row(self) -> list[str]:
        return [
            self.encounter_id,
            self.provider_id,
            self.role.value,
            str(self.day_index),
            self.phase.value,
            str(self.complication_count),
        ]


@dataclass(frozen=True)
class Segment:
    """Records whose day index falls in ``[start, stop)``."""

    index: int
    start: int
    stop: int
    records: tuple[EventRecord, ...] = ()

    @property
    def day_range(self) -> range:
        return range(self.start, self.stop)

    def for_phase(self, phase: Phase | str) -> "Segment":
        phase = Phase(phase)
        recs = tuple(r for r in self.records if r.phase is phase)
        return Segment(self.index, self.start, self.stop, recs)

    def encounters(self) -> dict[tuple[str, Phase], int]:
        """Distinct encounters mapped to their complication count."""
        out: dict[tuple[str, Phase], int] = {}
        for r in self.records:
            out.setdefault(r.encounter_key, r.complication_count)
        return out

    def __len__(self) -> int:
        return len(self.records)


class ParseResult(NamedTuple):
    records: list[EventRecord]
    unknown_roles: Counter

    @property
    def n_warnings(self) -> int:
        return sum(self.unknown_roles.values())


class DedupeResult(NamedTuple):
    records: list[EventRecord]
    removed: int


def _parse_int(value: str, name: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise IngestError(f"line {lineno}: {name} is not an integer: {value!r}") from None


def parse_events(source: IO[str] | IO[bytes] | str | Path, fmt: str = "csv") -> ParseResult:
    """Parse an encounter log.

    `source` is a path or an open text/binary stream. Only ``fmt="csv"`` is
    understood. Unknown role tokens are mapped to ``other`` and tallied in
    ``unknown_roles``; every other malformation raises :class:`IngestError`
    naming the 1-based line number (the header is line 1).
    """
    if fmt != "csv":
        raise IngestError(f"unsupported format {fmt!r}; only 'csv' is supported")
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return parse_events(fh, fmt)
    if isinstance(source, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(source, "mode", ""):
        source = io.TextIOWrapper(source, encoding="utf-8", newline="")

    reader = csv.reader(source)
    header = next(reader, None)
    if header is None:
        raise IngestError("line 1: empty input, expected a header row")
    if tuple(h.strip() for h in header) != COLUMNS:
        raise IngestError(f"line 1: header must be {','.join(COLUMNS)}, got {','.join(header)}")

    records: list[EventRecord] = []
    unknown: Counter = Counter()
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(COLUMNS):
            raise IngestError(f"line {lineno}: expected {len(COLUMNS)} fields, got {len(row)}")
        enc, prov, role_tok, day, phase_tok, comp = (c.strip() for c in row)
        if not enc or not prov:
            raise IngestError(f"line {lineno}: empty encounter_id or provider_id")
        try:
            role = Role(role_tok.lower())
        except ValueError:
            unknown[role_tok] += 1
            role = Role.OTHER
        try:
            phase = Phase(phase_tok.lower())
        except ValueError:
            raise IngestError(f"line {lineno}: phase must be intra or post, got {phase_tok!r}") from None
        day_i = _parse_int(day, "day_index", lineno)
        comp_i = _parse_int(comp, "complication_count", lineno)
        try:
            records.append(EventRecord(enc, prov, role, day_i, phase, comp_i))
        except IngestError as exc:
            raise IngestError(f"line {lineno}: {exc}") from None
    if unknown:
        log.warning("mapped %d records with unknown roles to 'other': %s",
                    sum(unknown.values()), dict(unknown))
    return ParseResult(records, unknown)


def write_events(records: Iterable[EventRecord], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in records:
        writer.writerow(r.as_row())


def dedupe(records: Iterable[EventRecord]) -> DedupeResult:
    """Collapse repeated (encounter, provider) pairs within a phase.

    The first occurrence is kept. Records of one encounter that disagree on
    day index or complication count are a data error.
    """
    seen: set[tuple[str, Phase, str]] = set()
    encounter_attrs: dict[tuple[str, Phase], tuple[int, int]] = {}
    out: list[EventRecord] = []
    removed = 0
    for r in records:
        attrs = (r.day_index, r.complication_count)
        prev = encounter_attrs.setdefault(r.encounter_key, attrs)
        if prev != attrs:
            what = "complication_count" if prev[1] != attrs[1] else "day_index"
            raise IngestError(
                f"encounter {r.encounter_id!r} ({r.phase}) has conflicting {what}: "
                f"{prev} vs {attrs} (day_index, complication_count)"
            )
        key = (r.encounter_id, r.phase, r.provider_id)
        if key in seen:
            removed += 1
            continue
        seen.add(key)
        out.append(r)
    return DedupeResult(out, removed)


def segment(records: Iterable[EventRecord], window_days: int = 100,
            horizon_days: int = 1300) -> list[Segment]:
    """Split records into consecutive half-open windows ``[k*w, (k+1)*w)``."""
    if window_days <= 0:
        raise IngestError(f"window_days must be positive, got {window_days}")
    if horizon_days <= 0 or horizon_days % window_days:
        raise IngestError(
            f"horizon_days ({horizon_days}) must be a positive multiple of window_days ({window_days})"
        )
    n_seg = horizon_days // window_days
    buckets: list[list[EventRecord]] = [[] for _ in range(n_seg)]
    late: set[str] = set()
    for r in records:
        if r.day_index >= horizon_days:
            late.add(f"{r.encounter_id}@{r.phase}")
            continue
        buckets[r.day_index // window_days].append(r)
    if late:
        shown = sorted(late)
        more = f" (+{len(shown) - 20} more)" if len(shown) > 20 else ""
        raise IngestError(
            f"{len(shown)} encounters beyond horizon day {horizon_days}: "
            + ", ".join(shown[:20]) + more
        )
    return [
        Segment(k, k * window_days, (k + 1) * window_days, tuple(b))
        for k, b in enumerate(buckets)
    ]


# --- synthetic logs -------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    """Parameters for :func:`generate_synthetic`.

    Defaults follow the intraoperative staffing counts (661 surgeons, 628
    nurses, 296 anesthesiologists) with ~30,000 encounters per phase over
    13 windows of 100 days.
    """

    n_surgeons: int = 661
    n_nurses: int = 628
    n_anesthesiologists: int = 296
    n_other: int = 0
    encounters_per_segment: int = 2300
    team_size_min: int = 3
    team_size_max: int = 8
    hub_weight: float = 2.0
    complication_rate: float = 0.3
    phase: str = "both"
    n_segments: int = field(default=13, metadata={"internal": True})
    window_days: int = field(default=100, metadata={"internal": True})

    def __post_init__(self):
        for name in ("n_surgeons", "n_nurses", "n_anesthesiologists", "n_other"):
            if getattr(self, name) < 0:
                raise IngestError(f"{name} must be >= 0")
        if self.encounters_per_segment < 0:
            raise IngestError("encounters_per_segment must be >= 0")
        if self.team_size_min < 1:
            raise IngestError("team_size_min must be >= 1")
        if self.team_size_min > self.team_size_max:
            raise IngestError(
                f"team_size_min ({self.team_size_min}) > team_size_max ({self.team_size_max})"
            )
        if self.hub_weight < 0:
            raise IngestError("hub_weight must be >= 0")
        if self.complication_rate < 0:
            raise IngestError("complication_rate must be >= 0")
        if self.phase not in ("intra", "post", "both"):
            raise IngestError(f"phase must be intra, post or both, got {self.phase!r}")
        if self.n_segments < 1 or self.window_days < 1:
            raise IngestError("n_segments and window_days must be positive")

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls) if not f.metadata.get("internal")]

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "SynthConfig":
        valid = cls.keys()
        bad = sorted(set(values) - set(valid))
        if bad:
            raise IngestError(
                f"invalid synth config key(s) {', '.join(bad)}; valid keys: {', '.join(valid)}"
            )
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for k, v in values.items():
            conv = {"int": int, "float": float, "str": str}[types[k]]
            try:
                kwargs[k] = conv(v)
            except (TypeError, ValueError):
                raise IngestError(f"synth config key {k}: cannot parse {v!r} as {types[k]}") from None
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "SynthConfig":
        """Read ``key = value`` lines; ``#`` starts a comment."""
        values: dict[str, str] = {}
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":"
            if sep not in line:
                raise IngestError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            k, v = (s.strip() for s in line.split(sep, 1))
            values[k] = v
        return cls.from_mapping(values)

    def to_dict(self) -> dict[str, object]:
        return {k: getattr(self, k) for k in self.keys()}

    def phases(self) -> list[Phase]:
        return [Phase.INTRA, Phase.POST] if self.phase == "both" else [Phase(self.phase)]


_POOL_ROLES = (
    ("n_surgeons", Role.SURGEON, "sur"),
    ("n_anesthesiologists", Role.ANESTHESIOLOGIST, "ane"),
    ("n_nurses", Role.NURSE, "nur"),
    ("n_other", Role.OTHER, "oth"),
)
_REQUIRED = (Role.SURGEON, Role.ANESTHESIOLOGIST, Role.NURSE)


def _weighted_pick(rng: np.random.Generator, weights: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        cum = np.cumsum(weights)
        return np.array([min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")),
                             len(weights) - 1)])
    return rng.choice(len(weights), size=k, replace=False, p=weights / weights.sum())


def generate_synthetic(config: SynthConfig, seed: int) -> list[EventRecord]:
    """Generate a deterministic encounter log for every phase in `config`.

    Each encounter gets one surgeon, one anesthesiologist and one nurse (as
    far as the team size allows); remaining seats are drawn from all pools in
    proportion to pool size. Within a role a provider is picked with weight
    ``1 + hub_weight * k`` where ``k`` counts the provider's encounters so far
    in the current window, which concentrates work on a few hubs.
    """
    pools = {role: [f"{prefix}-{i:04d}" for i in range(getattr(config, attr))]
             for attr, role, prefix in _POOL_ROLES}
    for role in _REQUIRED:
        if not pools[role]:
            raise IngestError(f"provider pool for required role {role} is empty")
    roles = [r for r, ids in pools.items() if ids]
    role_share = np.array([len(pools[r]) for r in roles], dtype=float)
    role_share /= role_share.sum()

    rng = np.random.default_rng(seed)
    out: list[EventRecord] = []
    for phase in config.phases():
        prefix = "I" if phase is Phase.INTRA else "P"
        counter = 0
        for k in range(config.n_segments):
            load = {r: np.zeros(len(pools[r])) for r in roles}
            days = np.sort(rng.integers(0, config.window_days, size=config.encounters_per_segment))
            for day in days:
                size = int(rng.integers(config.team_size_min, config.team_size_max + 1))
                need = Counter(_REQUIRED[: min(size, len(_REQUIRED))])
                extra = size - sum(need.values())
                if extra > 0:
                    for idx in rng.choice(len(roles), size=extra, p=role_share):
                        need[roles[idx]] += 1
                n_comp = int(rng.poisson(config.complication_rate))
                counter += 1
                enc = f"{prefix}{counter:06d}"
                day_index = k * config.window_days + int(day)
                for role in roles:
                    want = min(need.get(role, 0), len(pools[role]))
                    if not want:
                        continue
                    picked = _weighted_pick(rng, 1.0 + config.hub_weight * load[role], want)
                    load[role][picked] += 1
                    for p in sorted(picked):
                        out.append(EventRecord(enc, pools[role][p], role, day_index, phase, n_comp))
    return out
