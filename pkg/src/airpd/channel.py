"""Fading model and the analog multiple-access aggregation channel.

Devices transmit their dual-weighted subgradients simultaneously. Each
device inverts its own channel subject to a peak power limit; devices
whose inversion would exceed the limit stay silent for that round. The
receiver sees the superposition of the surviving signals plus thermal
noise, and rescales by the inversion gain so the output is the plain sum
of the transmitted vectors plus amplified noise.
"""

from dataclasses import dataclass

import numpy as np


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class FadingParams:
    """Flat-fading magnitude model with a dominant line-of-sight term.

    |h| = sqrt(t0 * (d/d0)^(-alpha)) * |sqrt(eps/(eps+1)) + sqrt(1/(eps+1)) * g|

    with g standard complex normal. The line-of-sight component is the
    constant 1 (no phase; the receiver works with magnitudes, a real
    baseband view). eps = 0 degenerates to Rayleigh, eps -> inf to a
    deterministic gain. t0 is the reference-distance gain (linear),
    d_ratio the distance in units of the reference distance.
    """

    t0: float              # linear path gain at the reference distance
    d_ratio: np.ndarray    # per-device d/d0
    alpha: float           # path loss exponent
    eps: float             # line-of-sight power factor

    def __post_init__(self):
        object.__setattr__(self, "d_ratio", np.atleast_1d(np.asarray(self.d_ratio, float)))
        if self.t0 <= 0 or self.alpha < 0 or self.eps < 0:
            raise ValueError("fading parameters out of range")
        if (self.d_ratio <= 0).any():
            raise ValueError("distance ratios must be positive")

    @property
    def n_devices(self):
        return self.d_ratio.size

    def path_gain(self):
        """Mean of |h|^2 per device (the small-scale part has unit power)."""
        return self.t0 * self.d_ratio ** (-self.alpha)

    def sample(self, rng, size=None):
        """Draw |h| for every device; size draws per device if given.

        Returns shape (n_devices,) or (size, n_devices).
        """
        shape = (self.n_devices,) if size is None else (size, self.n_devices)
        los = np.sqrt(self.eps / (self.eps + 1.0))
        scat = np.sqrt(1.0 / (self.eps + 1.0))
        g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
        mag = np.abs(los + scat * g)
        return np.sqrt(self.path_gain()) * mag


def transmit_signal(s, h, beta, p_max):
    """Channel-inversion precoder for one device.

    Returns the transmitted vector s / (sqrt(beta) * h) when the power
    budget allows full inversion, otherwise None (the device is silent).
    The participation test compares the inverted power against p_max and
    admits the boundary case.
    """
    if h <= 0:
        raise ValueError("channel magnitude must be positive")
    if beta <= 0 or p_max <= 0:
        raise ValueError("beta and p_max must be positive")
    s = np.asarray(s, dtype=float)
    power = float(s @ s) / (h * h)
    if power <= beta * p_max:
        return s / (np.sqrt(beta) * h)
    return None


@dataclass
class ChannelRound:
    aggregate: np.ndarray      # receiver estimate of sum_i s_i
    active: np.ndarray         # bool mask of participating devices
    duration_s: float          # simulated air time of the round


class AirCompChannel:
    """Analog aggregation with per-round fading, silence, and noise.

    One fading draw per device per round (block fading over the round's
    symbols). sigma2 is the receiver noise power per symbol in watts.
    symbols / bandwidth_hz fixes the round duration. force_full bypasses
    the power test (used to realize the ideal-aggregation limit).
    """

    def __init__(self, fading, beta, p_max, sigma2, symbols, bandwidth_hz, force_full=False):
        if beta <= 0 or p_max <= 0 or sigma2 < 0:
            raise ValueError("beta and p_max must be positive, sigma2 nonnegative")
        if symbols <= 0 or bandwidth_hz <= 0:
            raise ValueError("symbols and bandwidth must be positive")
        self.fading = fading
        self.beta = float(beta)
        self.p_max = float(p_max)
        self.sigma2 = float(sigma2)
        self.symbols = int(symbols)
        self.bandwidth_hz = float(bandwidth_hz)
        self.force_full = bool(force_full)

    def round(self, signals, rng):
        signals = np.asarray(signals, dtype=float)
        n, dim = signals.shape
        if n != self.fading.n_devices:
            raise ValueError("signal count does not match device count")
        h = self.fading.sample(rng)
        noise = rng.normal(0.0, np.sqrt(self.sigma2), size=dim)
        norms2 = np.einsum("ij,ij->i", signals, signals)
        if self.force_full:
            active = np.ones(n, dtype=bool)
        else:
            active = h * h >= norms2 / (self.beta * self.p_max)
        # receiver output after rescaling by sqrt(beta): each surviving
        # device's inversion h_i * s_i / (sqrt(beta) h_i) contributes
        # exactly s_i, and the noise comes out amplified. summing the
        # signals directly keeps that cancellation exact in floats too
        aggregate = signals[active].sum(axis=0) + np.sqrt(self.beta) * noise
        return ChannelRound(aggregate, active, aircomp_round_duration(self.symbols, self.bandwidth_hz))

    def participation_probability(self, signal_norm2, rng, n_samples=10_000):
        """Monte Carlo estimate of each device's odds of staying active.

        signal_norm2 is a per-device ||s_i||^2 (scalar broadcasts). The
        probability is over the fading draw only.
        """
        h = self.fading.sample(rng, size=int(n_samples))
        thresh = np.asarray(signal_norm2, float) / (self.beta * self.p_max)
        return (h * h >= thresh).mean(axis=0)


class ErrorFreeBaseline:
    """Ideal digital aggregation: exact sums, time-multiplexed uplink.

    The aggregate is exact every round; the price is paid in air time.
    Each round every device ships its full payload one after another at
    its own link rate, so the duration depends on the fading draw.
    """

    def __init__(self, fading, p_max, noise_power_w, symbols, bandwidth_hz):
        if p_max <= 0 or noise_power_w <= 0:
            raise ValueError("p_max and noise power must be positive")
        self.fading = fading
        self.p_max = float(p_max)
        self.noise_power_w = float(noise_power_w)
        self.symbols = int(symbols)
        self.bandwidth_hz = float(bandwidth_hz)

    def round(self, signals, rng):
        signals = np.asarray(signals, dtype=float)
        n = signals.shape[0]
        if n != self.fading.n_devices:
            raise ValueError("signal count does not match device count")
        h = self.fading.sample(rng)
        duration = tdma_round_duration(h, self.symbols, self.p_max, self.noise_power_w, self.bandwidth_hz)
        return ChannelRound(signals.sum(axis=0), np.ones(n, dtype=bool), duration)


def aircomp_round_duration(symbols, bandwidth_hz):
    """Air time of one analog aggregation round: all devices overlap."""
    if symbols <= 0 or bandwidth_hz <= 0:
        raise ValueError("symbols and bandwidth must be positive")
    return symbols / bandwidth_hz


def tdma_round_duration(h, symbols, p_max, noise_power_w, bandwidth_hz):
    """Air time of one time-multiplexed digital round.

    Per device: 64 header symbols plus 17 coded symbols per payload entry
    (16-bit quantized value plus one symbol of framing), sent at the
    device's own spectral efficiency log2(1 + p_max |h|^2 / noise).
    Devices take turns, so durations add.
    """
    h = np.atleast_1d(np.asarray(h, float))
    if (h <= 0).any():
        raise ValueError("channel magnitudes must be positive")
    if symbols < 0 or bandwidth_hz <= 0 or p_max <= 0 or noise_power_w <= 0:
        # symbols = 0 is allowed: a header-only round still costs air time
        raise ValueError("parameters must be positive")
    snr = p_max * h * h / noise_power_w
    per_device = (64.0 + 17.0 * symbols) / np.log2(1.0 + snr)
    return float(per_device.sum() / bandwidth_hz)


def expected_participants(gammas):
    """Mean number of active devices given per-device probabilities."""
    gammas = np.asarray(gammas, dtype=float)
    if ((gammas < 0) | (gammas > 1)).any():
        raise ValueError("probabilities must lie in [0, 1]")
    return float(gammas.sum())


def participant_count_pmf(gammas):
    """Distribution of the active-device count (independent Bernoullis).

    Returns pmf[a] = P(count = a) for a = 0..n, computed by the usual
    one-device-at-a-time convolution. Matches brute-force enumeration
    over all participation subsets.
    """
    gammas = np.asarray(gammas, dtype=float)
    if ((gammas < 0) | (gammas > 1)).any():
        raise ValueError("probabilities must lie in [0, 1]")
    pmf = np.array([1.0])
    for g in gammas:
        nxt = np.zeros(pmf.size + 1)
        nxt[: pmf.size] += pmf * (1.0 - g)
        nxt[1:] += pmf * g
        pmf = nxt
    return pmf
