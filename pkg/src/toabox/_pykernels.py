"""Pure numpy kernel routines; the fallback when the compiled core is absent.

Signatures mirror ``_ckernels`` exactly. Inputs are 1-D float64 arrays of
equal length; outputs are complex128.
"""
import numpy as np

BACKEND = "python"


def closed(q, qp, gamma, l, mu, hbar):
    q = np.asarray(q, dtype=np.float64)
    qp = np.asarray(qp, dtype=np.float64)
    d = q - qp
    # Heaviside with H(0) = 1/2: average of the two phases on the diagonal
    phase = np.where(d > 0, np.exp(1j * gamma), np.where(d < 0, np.exp(-1j * gamma), np.cos(gamma) + 0j))
    return (-mu / (4.0 * hbar * np.sin(gamma))) * (q + qp) * phase


def periodic(q, qp, l, mu, hbar):
    q = np.asarray(q, dtype=np.float64)
    qp = np.asarray(qp, dtype=np.float64)
    c = mu / (4.0 * hbar)
    return 1j * (-c * (q + qp) * np.sign(q - qp) + (c / l) * (q * q - qp * qp))


def zero_mode(q, qp, gamma, l, mu, hbar):
    q = np.asarray(q, dtype=np.float64)
    qp = np.asarray(qp, dtype=np.float64)
    return (-mu / (4.0 * hbar * gamma)) * (q + qp) * np.exp(1j * gamma * (q - qp) / l)


def series_sums(q, qp, gamma, l, mu, hbar, checkpoints):
    """Symmetric partial sums of the eigenfunction series at each checkpoint.

    Column j holds the sum over |n| <= checkpoints[j], accumulated as the
    n = 0 term followed by the pairs (n, -n) in ascending n.
    """
    q = np.asarray(q, dtype=np.float64)
    qp = np.asarray(qp, dtype=np.float64)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    x = (q - qp) / l
    pref = (-mu / (4.0 * hbar)) * (q + qp)
    out = np.empty((q.size, checkpoints.size), dtype=np.complex128)
    acc = np.exp(1j * gamma * x) / gamma
    done = 0
    chunk = 2048
    for j, stop in enumerate(checkpoints):
        while done < stop:
            n = np.arange(done + 1, min(stop, done + chunk) + 1, dtype=np.float64)
            kp = gamma + n * np.pi
            km = gamma - n * np.pi
            pair = np.exp(1j * np.outer(x, kp)) / kp + np.exp(1j * np.outer(x, km)) / km
            # sequential accumulation keeps the order identical to the compiled loop
            csum = np.cumsum(np.concatenate([acc[:, None], pair], axis=1), axis=1)
            acc = csum[:, -1]
            done = int(n[-1])
        out[:, j] = pref * acc
    return out
