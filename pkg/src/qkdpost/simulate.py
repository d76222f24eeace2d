"""End-to-end protocol simulation and analytic key-rate sweeps.

``run_protocol`` plays both parties of one post-processing session over a
simulated channel: exchange and sifting, channel estimation on the sacrificed
fraction, rate decision, syndrome reconciliation of the remaining block, and
privacy amplification down to the decided key length.  Every random draw is
controlled by one of three named seeds, so a config reproduces its report
byte for byte (wall-clock timings are kept out of the canonical text).

``sweep_rates`` writes the analytic rate table of a one-parameter channel
family as CSV; the values are unclamped, so negative entries mean the
corresponding processing aborts there.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    AffineChannel,
    Basis,
    choi_from_affine,
    format_channel_spec,
    joint_distribution,
    make_amplitude_damping,
    make_rotation,
    outcome_probability,
    parse_channel_spec,
)
from .entropy import JointDistribution, cond_entropy
from .hashing import apply_hash, key_length, sample_hash
from .keyrate import (
    RateReport,
    keyrate,
    keyrate_conventional_bb84,
    keyrate_conventional_sixstate,
)
from .reconciliation import gen_parity_check, priors_from_joint, sp_decode, syndrome
from .tomography import (
    BB84_BASES,
    SIXSTATE_BASES,
    TallyTable,
    estimate_rates_bb84,
    estimate_rates_sixstate,
)
from .worstcase import ObservableParams, worst_case_ambiguity

SWEEP_FORMAT_VERSION = 1
SWEEP_COLUMNS = (
    "param",
    "sixstate_direct",
    "sixstate_reverse",
    "bb84_direct",
    "bb84_reverse",
    "mismatched",
    "conventional_bb84",
    "conventional_sixstate",
)


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str = "sixstate"
    channel: AffineChannel = field(default_factory=lambda: make_amplitude_damping(0.0))
    direction: str = "direct"
    n_signals: int = 100_000
    estimation_fraction: float = 0.5
    margin: float = 0.1
    epsilon: float = 0.01
    seed_channel: int = 1
    seed_code: int = 2
    seed_hash: int = 3
    ldpc_col_weight: int = 3
    max_iter: int = 100

    def __post_init__(self):
        if self.protocol not in ("bb84", "sixstate"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.direction not in ("direct", "reverse", "mismatched"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if not 0.0 < self.estimation_fraction < 1.0:
            raise ValueError("estimation fraction must be inside (0, 1)")
        if self.n_signals < 1000:
            raise ValueError("need at least 1000 signals for a meaningful run")

    @property
    def bases(self) -> tuple[Basis, ...]:
        return SIXSTATE_BASES if self.protocol == "sixstate" else BB84_BASES

    @property
    def key_pair(self) -> tuple[Basis, Basis]:
        return (Basis.Z, Basis.X) if self.direction == "mismatched" else (Basis.Z, Basis.Z)


_CONFIG_KEYS = {
    "protocol": str,
    "direction": str,
    "n_signals": int,
    "estimation_fraction": float,
    "margin": float,
    "epsilon": float,
    "seed_channel": int,
    "seed_code": int,
    "seed_hash": int,
    "ldpc_col_weight": int,
    "max_iter": int,
}


def parse_config(text: str) -> ProtocolConfig:
    """Key = value lines; the channel value is a one-line channel spec."""
    kwargs = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {line!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        value = value.strip()
        if key == "channel":
            kwargs["channel"] = parse_channel_spec(value)
        elif key in _CONFIG_KEYS:
            kwargs[key] = _CONFIG_KEYS[key](value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return ProtocolConfig(**kwargs)


def load_config(path) -> ProtocolConfig:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())


@dataclass(frozen=True)
class ExchangeResult:
    tally: TallyTable
    x_key: np.ndarray
    y_key: np.ndarray


def simulate_exchange(config: ProtocolConfig) -> ExchangeResult:
    """Sample one session's raw data.

    Uniform bit and uniform basis on both sides.  The first
    ``estimation_fraction`` of the signals feeds the tally (all basis pairs);
    of the remainder only the configured key basis pair is kept, as aligned
    (x, y) sequences.
    """
    rng = np.random.default_rng(config.seed_channel)
    bases = config.bases
    nb = len(bases)
    n = config.n_signals
    abit = rng.integers(0, 2, size=n)
    abas = rng.integers(0, nb, size=n)
    bbas = rng.integers(0, nb, size=n)
    p1 = np.empty((nb, 2, nb))
    for ia, a in enumerate(bases):
        for x in (0, 1):
            for ib, b in enumerate(bases):
                p1[ia, x, ib] = outcome_probability(config.channel, a, x, b, 1)
    ybit = (rng.random(n) < p1[abas, abit, bbas]).astype(np.int64)

    n_est = int(round(n * config.estimation_fraction))
    est = np.arange(n) < n_est
    flat = ((abas * nb + bbas) * 2 + abit) * 2 + ybit
    counts = np.bincount(flat[est], minlength=nb * nb * 4).reshape(nb, nb, 2, 2)
    tally = TallyTable(counts, bases)

    ka, kb = config.key_pair
    ia_key = bases.index(ka)
    ib_key = bases.index(kb)
    mask = (~est) & (abas == ia_key) & (bbas == ib_key)
    return ExchangeResult(tally, abit[mask].astype(np.uint8), ybit[mask].astype(np.uint8))


@dataclass(frozen=True)
class RunReport:
    """Outcome of one protocol run.

    ``abort_reason`` is "none" on success; aborts carry zero key length and
    one of nonpositive_rate, syndrome_rate_full, decode_failure,
    zero_key_length.  ``timings`` holds wall-clock seconds per stage and is
    excluded from :meth:`canonical_text` so reports stay reproducible.
    """

    protocol: str
    direction: str
    n_signals: int
    n_key: int
    channel_estimate: str
    decided_ambiguity: float
    decided_cond_entropy: float
    decided_rate: float
    syndrome_rate: float
    decode_success: bool
    decode_iterations: int
    key_length: int
    keys_equal: bool
    empirical_key_rate: float
    abort_reason: str
    timings: dict = field(default_factory=dict, compare=False)

    def canonical_text(self) -> str:
        lines = [f"# qkdpost run report v{SWEEP_FORMAT_VERSION}"]
        for name in (
            "protocol",
            "direction",
            "n_signals",
            "n_key",
            "channel_estimate",
            "decided_ambiguity",
            "decided_cond_entropy",
            "decided_rate",
            "syndrome_rate",
            "decode_success",
            "decode_iterations",
            "key_length",
            "keys_equal",
            "empirical_key_rate",
            "abort_reason",
        ):
            value = getattr(self, name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{name}={value}")
        return "\n".join(lines) + "\n"


def _empirical_key_joint(config: ProtocolConfig, tally: TallyTable) -> JointDistribution:
    """Relative frequencies of the key basis pair's tally cell.

    The reconciliation statistics are directly observable, so the syndrome
    rate and the decoder priors use the raw cell rather than the smoothed
    joint of the projected channel estimate; near-deterministic channels
    would otherwise pick up a large upward entropy bias from the noise floor.
    """
    ka, kb = config.key_pair
    ia = config.bases.index(ka)
    ib = config.bases.index(kb)
    cell = tally.counts[ia, ib].astype(float)
    total = cell.sum()
    if total <= 0:
        raise ValueError("estimation subset has no samples in the key basis pair")
    return JointDistribution(cell / total)


def _estimate_for_run(config: ProtocolConfig, tally: TallyTable):
    """Decided rate report, prior-feeding joint, and estimate summary text.

    Ambiguity comes from the tomographic pipeline; the conditional entropy
    comes from the empirical key-pair joint.
    """
    joint = _empirical_key_joint(config, tally)
    if config.direction == "reverse":
        ce = cond_entropy(joint, "y_given_x")
    else:
        ce = cond_entropy(joint, "x_given_y")
    if config.protocol == "sixstate":
        est = estimate_rates_sixstate(tally)
        ambiguity = {
            "direct": est.direct.ambiguity,
            "reverse": est.reverse.ambiguity,
            "mismatched": est.direct.ambiguity,
        }[config.direction]
        estimate_text = format_channel_spec(est.channel)
    else:
        est = estimate_rates_bb84(tally)
        ambiguity = {
            "direct": est.direct.ambiguity,
            "reverse": est.reverse.ambiguity,
            "mismatched": est.mismatched.ambiguity,
        }[config.direction]
        estimate_text = "omega " + " ".join(repr(float(v)) for v in est.omega.as_array())
    return RateReport.build(config.direction, ambiguity, ce), joint, estimate_text


def run_protocol(config: ProtocolConfig) -> RunReport:
    timings: dict = {}
    t0 = time.perf_counter()
    exchange = simulate_exchange(config)
    timings["exchange_s"] = time.perf_counter() - t0
    n_key = int(exchange.x_key.shape[0])

    t0 = time.perf_counter()
    rep, joint, estimate_text = _estimate_for_run(config, exchange.tally)
    timings["estimate_s"] = time.perf_counter() - t0

    def aborted(reason: str, **over) -> RunReport:
        base = dict(
            protocol=config.protocol,
            direction=config.direction,
            n_signals=config.n_signals,
            n_key=n_key,
            channel_estimate=estimate_text,
            decided_ambiguity=rep.ambiguity,
            decided_cond_entropy=rep.cond_entropy,
            decided_rate=rep.key_rate,
            syndrome_rate=0.0,
            decode_success=False,
            decode_iterations=0,
            key_length=0,
            keys_equal=False,
            empirical_key_rate=0.0,
            abort_reason=reason,
            timings=timings,
        )
        base.update(over)
        return RunReport(**base)

    if rep.raw_rate <= 0.0:
        return aborted("nonpositive_rate")

    m = int(np.ceil(n_key * (rep.cond_entropy + config.margin)))
    if m >= n_key:
        return aborted("syndrome_rate_full")
    syn_rate = m / n_key

    # source holds the sequence the key is distilled from; the helper decodes
    if config.direction == "reverse":
        source, helper = exchange.y_key, exchange.x_key
    else:
        source, helper = exchange.x_key, exchange.y_key

    t0 = time.perf_counter()
    code = gen_parity_check(n_key, m, config.ldpc_col_weight, config.seed_code)
    timings["code_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    syn = syndrome(code, source)
    priors = priors_from_joint(joint, helper, config.direction)
    result = sp_decode(code, syn, priors, config.max_iter)
    timings["decode_s"] = time.perf_counter() - t0

    if not result.converged:
        return aborted("decode_failure", syndrome_rate=syn_rate)

    ell = key_length(n_key, m, rep.ambiguity, config.epsilon)
    if ell == 0:
        return aborted(
            "zero_key_length",
            syndrome_rate=syn_rate,
            decode_success=True,
            decode_iterations=result.iterations,
        )

    t0 = time.perf_counter()
    desc = sample_hash(ell, n_key, config.seed_hash)
    key_source = apply_hash(desc, source)
    key_helper = apply_hash(desc, result.bits)
    timings["hash_s"] = time.perf_counter() - t0

    return RunReport(
        protocol=config.protocol,
        direction=config.direction,
        n_signals=config.n_signals,
        n_key=n_key,
        channel_estimate=estimate_text,
        decided_ambiguity=rep.ambiguity,
        decided_cond_entropy=rep.cond_entropy,
        decided_rate=rep.key_rate,
        syndrome_rate=syn_rate,
        decode_success=True,
        decode_iterations=result.iterations,
        key_length=ell,
        keys_equal=bool(np.array_equal(key_source, key_helper)),
        empirical_key_rate=ell / n_key,
        abort_reason="none",
        timings=timings,
    )


# ---------------------------------------------------------------------------
# analytic sweeps
# ---------------------------------------------------------------------------


def make_family_channel(family: str, param: float) -> AffineChannel:
    if family == "amplitude_damping":
        return make_amplitude_damping(param)
    if family == "rotation":
        return make_rotation(param)
    raise ValueError(f"unknown channel family {family!r}")


def sweep_row(ch: AffineChannel) -> dict[str, float]:
    """All analytic rates for one channel; unclamped."""
    choi = choi_from_affine(ch)
    direct = keyrate(choi, "direct")
    reverse = keyrate(choi, "reverse")
    mismatched = keyrate(choi, "mismatched")
    omega = ObservableParams.from_channel(ch)
    joint_zz = JointDistribution(joint_distribution(ch, Basis.Z, Basis.Z))
    f_direct = worst_case_ambiguity(omega, "direct")
    f_reverse = worst_case_ambiguity(omega, "reverse")
    return {
        "sixstate_direct": direct.raw_rate,
        "sixstate_reverse": reverse.raw_rate,
        "bb84_direct": f_direct - cond_entropy(joint_zz, "x_given_y"),
        "bb84_reverse": f_reverse - cond_entropy(joint_zz, "y_given_x"),
        "mismatched": mismatched.raw_rate,
        "conventional_bb84": keyrate_conventional_bb84(choi),
        "conventional_sixstate": keyrate_conventional_sixstate(choi),
    }


def sweep_rates(family: str, start: float, stop: float, steps: int, out_path=None) -> str:
    """CSV of analytic rates over an inclusive parameter grid."""
    if steps < 2:
        raise ValueError("need at least 2 grid points")
    grid = np.linspace(start, stop, steps)
    lines = [
        f"# qkdpost rates sweep v{SWEEP_FORMAT_VERSION} family={family}",
        ",".join(SWEEP_COLUMNS),
    ]
    for param in grid:
        row = sweep_row(make_family_channel(family, float(param)))
        values = [repr(float(param))] + [repr(float(row[c])) for c in SWEEP_COLUMNS[1:]]
        lines.append(",".join(values))
    text = "\n".join(lines) + "\n"
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text)
    return text
