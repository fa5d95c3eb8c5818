"""Radiated power spectra and frequency-comb extraction.

The cavity output power spectrum is proportional to |l_-(f)|^2, the squared
Fourier amplitude of the complex transverse total spin, with the convention
l_-(f) = integral l_-(t) exp(+2 pi i f t) dt.  Spectra are shown in the
rotating frame: the monochromatic superradiance line sits at f = 0 and combs
appear as equidistant peaks f_q + p*f0.
"""

from dataclasses import dataclass, field

import numpy as np

from .elliptic import complete_K


@dataclass
class CombSpectrum:
    """Discrete power spectrum with normalization bookkeeping.

    Heights are scaled so a unit complex tone on a grid frequency has peak
    height 1; `total_power()` undoes the window for Parseval checks.
    """

    f: np.ndarray
    power: np.ndarray
    dt: float
    n: int                       # record length before padding
    pad: int
    window: str
    _wsum: float = 0.0
    _w2sum: float = 0.0
    ladder: "CombLadder" = None

    def total_power(self):
        """Window-weighted mean square of the time series."""
        return float(self.power.sum() * self._wsum ** 2
                     / (self.n * self.pad * self._w2sum))

    def power_near(self, f0, halfwidth_bins=2):
        """Largest power within a few analysis bins of frequency f0."""
        df = self.f[1] - self.f[0]
        sel = np.abs(self.f - f0) <= halfwidth_bins * self.pad * df
        return float(self.power[sel].max()) if sel.any() else 0.0


@dataclass
class CombLadder:
    f0: float
    f_q: float
    parity: str                  # "odd" | "all" | "none"
    peaks: np.ndarray            # (k, 2): frequency, height
    even_power: float = 0.0      # total at even-harmonic positions
    odd_power: float = 0.0

    def to_dict(self):
        return {"f0": self.f0, "fq": self.f_q, "parity": self.parity,
                "peaks": [{"f": float(f), "h": float(h)} for f, h in self.peaks]}


_WINDOWS = {
    "hann": np.hanning,
    "rectangular": np.ones,
}


def power_spectrum(source, window="hann", pad=4, min_samples=1024):
    """Power spectrum of l_-(t) from a trajectory or (t, series) pair.

    The record must be uniformly sampled and post-transient; zero-padding
    interpolates the grid for sub-bin peak location.
    """
    if hasattr(source, "l_minus"):
        t, x = source.t, source.l_minus()
    else:
        t, x = source
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=complex)
    n = len(x)
    if n < min_samples:
        raise ValueError(f"record too short: {n} < {min_samples} samples")
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9):
        raise ValueError("spectrum needs a uniformly sampled record")
    if window not in _WINDOWS:
        raise ValueError(f"unknown window {window!r}")
    w = _WINDOWS[window](n)
    xw = np.zeros(n * pad, dtype=complex)
    xw[:n] = w * x
    # +2*pi*i*f*t convention: the inverse FFT carries the positive exponent
    amp = np.fft.ifft(xw) * (n * pad)
    f = np.fft.fftfreq(n * pad, dt)
    order = np.argsort(f)
    power = np.abs(amp[order]) ** 2 / w.sum() ** 2
    return CombSpectrum(f=f[order], power=power, dt=dt, n=n, pad=pad,
                        window=window, _wsum=float(w.sum()),
                        _w2sum=float((w * w).sum()))


def find_peaks(spec, threshold=1e-6, lobe_bins=8):
    """Local maxima above threshold*max, one per window main lobe, with
    quadratic interpolation of position and height."""
    p = spec.power
    floor = threshold * p.max()
    half = max(1, lobe_bins * spec.pad // 2)
    out = []
    for i in range(1, len(p) - 1):
        if p[i] < floor or p[i] < p[i - 1] or p[i] <= p[i + 1]:
            continue
        lo, hi = max(0, i - half), min(len(p), i + half + 1)
        if p[i] < p[lo:hi].max():
            continue
        # parabolic refinement in log power
        la, lb, lc = np.log(p[i - 1]), np.log(p[i]), np.log(p[i + 1])
        denom = la - 2 * lb + lc
        shift = 0.5 * (la - lc) / denom if denom < 0 else 0.0
        shift = np.clip(shift, -0.5, 0.5)
        fpk = spec.f[i] + shift * (spec.f[1] - spec.f[0])
        hpk = np.exp(lb - 0.25 * (la - lc) * shift)
        out.append((fpk, hpk))
    return np.array(out) if out else np.empty((0, 2))


def extract_comb(spec, threshold=1e-6, parity_floor=1e-3, store=True):
    """Fit the detected peaks to a ladder f = f_q + p*f0 and classify parity.

    An odd-only comb (peaks at odd multiples of f0 only) shows up as spacing
    2*f0 with a half-spacing offset; a genuine offset f_q is reported signed,
    reduced to (-f0/2, f0/2].
    """
    peaks = find_peaks(spec, threshold=threshold)
    if len(peaks) == 0:
        raise ValueError("no peaks above threshold; not a comb")
    ladder = _fit_ladder(spec, peaks, parity_floor)
    if store:
        spec.ladder = ladder
    return ladder


def _fit_ladder(spec, peaks, parity_floor):
    freqs = peaks[:, 0]
    if len(freqs) < 2:
        f_dom = freqs[0]
        return CombLadder(f0=np.nan, f_q=f_dom, parity="none", peaks=peaks)
    diffs = np.diff(np.sort(freqs))
    diffs = diffs[diffs > 2 * (spec.f[1] - spec.f[0]) * spec.pad]
    if len(diffs) == 0:
        return CombLadder(f0=np.nan, f_q=freqs[0], parity="none", peaks=peaks)
    d = np.median(diffs)
    # refine spacing and offset by least squares on integer indices
    for _ in range(3):
        idx = np.round((freqs - freqs[0]) / d)
        A = np.column_stack([np.ones_like(idx), idx])
        c0, d = np.linalg.lstsq(A, freqs, rcond=None)[0]
    bintol = 4 * (spec.f[1] - spec.f[0]) * spec.pad
    offset = c0 % d
    if min(offset, d - offset) < bintol:
        f0, f_q = d, 0.0
    elif abs(offset - 0.5 * d) < bintol:
        f0, f_q = 0.5 * d, 0.0
    else:
        f0 = d
        f_q = offset if offset <= 0.5 * d else offset - d
    even, odd = _ladder_power(spec, f0, f_q)
    if f_q == 0.0:
        parity = "odd" if even < parity_floor * peaks[:, 1].max() else "all"
    else:
        parity = "all"
    return CombLadder(f0=float(f0), f_q=float(f_q), parity=parity, peaks=peaks,
                      even_power=even, odd_power=odd)


def _ladder_power(spec, f0, f_q):
    """Measured power summed over even and odd harmonic positions."""
    fmax = spec.f[-1]
    even = odd = 0.0
    pmax = int(fmax / f0)
    for pp in range(-pmax, pmax + 1):
        h = spec.power_near(f_q + pp * f0)
        if pp % 2 == 0:
            even += h
        else:
            odd += h
    return even, odd


def mirror_asymmetry(spec, floor=1e-6):
    """Worst relative height mismatch between peaks at +f and -f."""
    peaks = find_peaks(spec, threshold=floor)
    if len(peaks) == 0:
        return 0.0
    df = (spec.f[1] - spec.f[0]) * spec.pad * 4
    worst = 0.0
    for f, h in peaks:
        if f <= df:
            continue
        partner = peaks[np.abs(peaks[:, 0] + f) < df]
        if len(partner) == 0:
            worst = 1.0
            continue
        hm = partner[0, 1]
        worst = max(worst, abs(h - hm) / max(h, hm))
    return float(worst)


def reflection_symmetry(spec, tol=0.01, floor=1e-6):
    """True when mirrored peak heights agree to within tol."""
    return bool(mirror_asymmetry(spec, floor=floor) < tol)


def predicted_f0(params, regime):
    """Closed-form comb spacing in the analytically solvable regimes."""
    delta, W = abs(params.delta), params.W
    if regime == "W->1":
        if delta <= 1.0:
            raise ValueError("the W -> 1 comb needs delta > 1")
        return np.sqrt(delta ** 2 - 1.0) / (4.0 * np.pi)
    if regime == "W->0":
        return delta / (4.0 * np.pi)
    if regime == "delta>>1":
        if delta <= W:
            raise ValueError("the large-detuning comb needs delta > W")
        return np.sqrt(delta ** 2 - W ** 2) / (4.0 * np.pi)
    if regime == "elliptic":
        from .cycles import elliptic_k
        eps, r = 1.0 - W, delta - 1.0
        k = elliptic_k(eps, r)
        if k is None:
            raise ValueError("no cn-type cycle at these parameters")
        return np.sqrt(abs(r)) / (4.0 * complete_K(k)
                                  * np.sqrt(2.0 * abs(1.0 - 2.0 * k * k)))
    raise ValueError(f"unknown regime {regime!r}")


def to_si(f_dimensionless, n_atoms, rabi_hz, kappa_hz):
    """Convert a dimensionless frequency to Hz via N*Gamma_c = N Omega^2/kappa."""
    if n_atoms <= 0 or rabi_hz <= 0 or kappa_hz <= 0:
        raise ValueError("N, Omega and kappa must be positive")
    return f_dimensionless * n_atoms * rabi_hz ** 2 / kappa_hz


def collective_unit_hz(n_atoms, rabi_hz, kappa_hz):
    """The time/energy unit N*Gamma_c in Hz."""
    return to_si(1.0, n_atoms, rabi_hz, kappa_hz)
