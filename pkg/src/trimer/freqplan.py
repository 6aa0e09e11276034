"""Circuit-QED drive-frequency planner for the three-photon pump scheme.

Four pump tones activate the four third-order parametric processes that
together reproduce the three-body coupling:

    w1 = wa + wb + wc + 3*w_eff   -> a' b' c' + h.c.
    w2 = wa + wb - wc +   w_eff   -> a' b' c  + h.c.
    w3 = wa - wb + wc +   w_eff   -> a' b  c' + h.c.
    w4 = wa - wb - wc +   w_eff   -> a  b' c' + h.c.

A formally negative tone is driven at its absolute value with the process
relabeled to the Hermitian conjugate. The spurious scan enumerates every
two- and three-photon resonance over all listed resonator modes and
reports the smallest detuning delta; detunings are measured against the
tone carriers without the small effective-model offsets (Delta_i << delta),
which is also how the quoted delta of the reference parameter set arises.
"""

from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
import json
import math

from .exceptions import DomainError, InfeasiblePlanError
from .model import LAMBDA_C, ModelParams

# g/delta below this is labeled safe (well under the ~1 scale where the
# rotating-wave argument breaks down).
DEFAULT_SAFE_RATIO = 0.1


@dataclass(frozen=True)
class ResonatorTable:
    """Mode frequencies (fundamental first) per resonator, angular units."""

    freqs: dict                    # 'a'|'b'|'c' -> tuple of frequencies
    kerr: dict | None = None       # optional per-mode Kerr strengths

    def __post_init__(self):
        for m in ("a", "b", "c"):
            fs = self.freqs.get(m)
            if not fs:
                raise DomainError(f"resonator {m} has no mode frequencies")
            if any(f <= 0 for f in fs):
                raise DomainError(f"resonator {m} has non-positive frequencies")
            if any(b <= a for a, b in zip(fs, fs[1:])):
                raise DomainError(f"resonator {m} frequencies must be increasing")

    def fundamental(self, m):
        return self.freqs[m][0]

    def all_modes(self):
        """[(label, freq)] over every listed mode, e.g. ('a0', wa0)."""
        out = []
        for m in ("a", "b", "c"):
            for n, f in enumerate(self.freqs[m]):
                out.append((f"{m}{n}", f))
        return out


@dataclass(frozen=True)
class Tone:
    index: int             # 1..4
    frequency: float       # driven (positive) frequency
    carrier: float         # |base combination| without the Delta_i offset
    detuning: float        # Delta_i = 3*w_eff (tone 1) or w_eff
    process: str           # e.g. "a'b'c'" with ' marking creation
    conjugated: bool       # True when folded from a negative formal frequency


@dataclass(frozen=True)
class Spurious:
    tone_index: int
    process: str           # participating modes with signs, e.g. "+a0+c0+c1"
    resonance: float
    detuning: float        # |carrier - resonance|


@dataclass(frozen=True)
class DrivePlan:
    omega_eff: float
    tones: tuple
    coupling: float | None = None          # g = beta_d*chi3/2 when given
    spurious: tuple = field(default=())
    min_detuning: float | None = None
    ratio: float | None = None             # g/delta
    safe: bool | None = None


_PROCESSES = (
    (1, (1, 1, 1), "a'b'c'"),
    (2, (1, 1, -1), "a'b'c"),
    (3, (1, -1, 1), "a'bc'"),
    (4, (1, -1, -1), "ab'c'"),
)


def _conjugate_process(proc):
    # "a'b'c" -> "abc'": primed (creation) letters become unprimed and back.
    out = []
    i = 0
    while i < len(proc):
        if i + 1 < len(proc) and proc[i + 1] == "'":
            out.append(proc[i])
            i += 2
        else:
            out.append(proc[i] + "'")
            i += 1
    return "".join(out)


def plan_tones(table: ResonatorTable, omega_eff: float) -> DrivePlan:
    """Four pump tones for a target effective mode frequency omega_eff."""
    if omega_eff < 0:
        raise DomainError("omega_eff must be >= 0")
    funds = [table.fundamental(m) for m in ("a", "b", "c")]
    if len(set(funds)) != 3:
        raise DomainError("fundamental frequencies must be pairwise distinct")
    tones = []
    for idx, signs, proc in _PROCESSES:
        delta = 3.0 * omega_eff if idx == 1 else omega_eff
        carrier = sum(s * f for s, f in zip(signs, funds))
        formal = carrier + delta
        conj = formal < 0
        if conj:
            # Drive at |w|; the activated process is the Hermitian conjugate.
            proc = _conjugate_process(proc)
        freq = abs(formal)
        if freq == 0:
            raise InfeasiblePlanError(f"tone {idx} lands at zero frequency")
        tones.append(Tone(idx, freq, abs(carrier), delta, proc, conj))
    return DrivePlan(omega_eff=omega_eff, tones=tuple(tones))


def _candidate_resonances(table: ResonatorTable):
    """All +-w_m +- w_n (+- w_p) combinations over listed modes.

    The four intended processes (one photon in each fundamental) are
    excluded; everything else, including repeated modes like c1 + c1, is a
    spurious candidate.
    """
    modes = table.all_modes()
    fundamentals = {f"{m}0" for m in ("a", "b", "c")}
    for order in (2, 3):
        for combo in combinations_with_replacement(modes, order):
            labels = [c[0] for c in combo]
            if order == 3 and set(labels) == fundamentals:
                continue  # intended three-photon process
            for signs in product((1, -1), repeat=order):
                freq = sum(s * f for s, (_, f) in zip(signs, combo))
                if freq <= 0:
                    continue
                name = "".join(
                    f"{'+' if s > 0 else '-'}{lab}" for s, lab in zip(signs, labels)
                )
                yield name, freq


def spurious_scan(table: ResonatorTable, plan: DrivePlan,
                  coupling: float | None = None,
                  safe_ratio: float = DEFAULT_SAFE_RATIO) -> DrivePlan:
    """Detunings of every unwanted two-/three-photon resonance from each tone."""
    if any(len(table.freqs[m]) < 2 for m in ("a", "b", "c")):
        raise DomainError("spurious scan needs at least one harmonic per resonator")
    candidates = sorted(set(_candidate_resonances(table)))
    hits = []
    for tone in plan.tones:
        for name, freq in candidates:
            hits.append(Spurious(tone.index, name, freq, abs(tone.carrier - freq)))
    hits.sort(key=lambda s: (s.detuning, s.tone_index, s.process))
    delta = hits[0].detuning
    ratio = None
    safe = None
    if coupling is not None:
        ratio = coupling / delta if delta > 0 else math.inf
        safe = ratio < safe_ratio
    return DrivePlan(
        omega_eff=plan.omega_eff, tones=plan.tones, coupling=coupling,
        spurious=tuple(hits[:50]), min_detuning=delta, ratio=ratio, safe=safe,
    )


def required_coupling(p: ModelParams) -> float:
    """Effective coupling reaching the first-order transition: g = (3/4)sqrt(omega*U)."""
    return 0.75 * math.sqrt(p.omega * p.u)


def plan_to_json(plan: DrivePlan) -> str:
    doc = {
        "omega_eff": plan.omega_eff,
        "tones": [
            {
                "index": t.index, "frequency": t.frequency, "carrier": t.carrier,
                "detuning": t.detuning, "process": t.process,
                "conjugated": t.conjugated,
            }
            for t in plan.tones
        ],
        "coupling": plan.coupling,
        "min_detuning": plan.min_detuning,
        "ratio": plan.ratio,
        "safe": plan.safe,
        "spurious": [
            {
                "tone": s.tone_index, "process": s.process,
                "resonance": s.resonance, "detuning": s.detuning,
            }
            for s in plan.spurious
        ],
    }
    return json.dumps(doc, indent=2)


def plan_report(plan: DrivePlan) -> str:
    lines = [f"drive plan (omega_eff = {plan.omega_eff:.6g})"]
    for t in plan.tones:
        tag = " (conjugate)" if t.conjugated else ""
        lines.append(
            f"  tone {t.index}: {t.frequency:.6g}  process {t.process}{tag}"
        )
    if plan.min_detuning is not None:
        lines.append(f"closest spurious detuning delta = {plan.min_detuning:.6g}")
        worst = plan.spurious[0]
        lines.append(f"  from tone {worst.tone_index} vs {worst.process}")
    if plan.ratio is not None:
        verdict = "safe" if plan.safe else "UNSAFE"
        lines.append(f"g/delta = {plan.ratio:.3e} -> {verdict}")
    return "\n".join(lines)
