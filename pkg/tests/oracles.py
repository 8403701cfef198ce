"""Naive loop reference implementations used to cross-check the filters.

Everything here is written as directly as possible from the definitions:
explicit Python loops, one mirror pad (numpy 'reflect') for out-of-image
accesses, no vectorization tricks. Deliberately slow; only run on tiny
stacks.
"""
import math

import numpy as np


def log_ratio_term(a, b):
    return math.log(math.sqrt(a / b) + math.sqrt(b / a))


def patch_d1(img_a, img_b, center, looks, patch_half):
    """Patch dissimilarity between two images at one center pixel."""
    n1 = 2 * patch_half + 1
    pa = np.pad(img_a, patch_half, mode="reflect")
    pb = np.pad(img_b, patch_half, mode="reflect")
    r, c = center
    total = 0.0
    for i in range(n1):
        for j in range(n1):
            total += log_ratio_term(pa[r + i, c + j], pb[r + i, c + j])
    return (2.0 * looks - 1.0) * total


def patf_weights(d1_values, tau1, tau2, h, self_index):
    """Piecewise weight rule evaluated exactly as specified."""
    m = len(d1_values)
    w = np.zeros(m)
    for t2, d in enumerate(d1_values):
        if d >= tau2:
            w[t2] = 0.0
        elif d > tau1:
            w[t2] = math.exp(-d / h)
        # d <= tau1 handled below once the band maximum is known
    fill = w.max()
    if fill == 0.0:
        fill = 1.0
    for t2, d in enumerate(d1_values):
        if d <= tau1:
            w[t2] = fill
    w[self_index] = fill
    return w


def patf(stack_data, looks, patch_half, tau1, tau2, h):
    """Temporal weighted average with patch-based weights, per pixel."""
    m, height, width = stack_data.shape
    out = np.zeros_like(stack_data)
    for t in range(m):
        for r in range(height):
            for c in range(width):
                d1 = [patch_d1(stack_data[t], stack_data[t2], (r, c), looks, patch_half)
                      for t2 in range(m)]
                w = patf_weights(d1, tau1, tau2, h, t)
                out[t, r, c] = (w * stack_data[:, r, c]).sum() / w.sum()
    return out


def temporal_combine(stack_data, mu):
    m = stack_data.shape[0]
    if m == 1:
        return mu.copy()
    out = np.zeros_like(mu)
    for t in range(m):
        out[t] = (mu[t] / m) * (stack_data / mu).sum(axis=0)
    return out


def boxcar_mu(img, window_half):
    nw = 2 * window_half + 1
    p = np.pad(img, window_half, mode="reflect")
    h, w = img.shape
    mu = np.zeros_like(img)
    for r in range(h):
        for c in range(w):
            mu[r, c] = p[r:r + nw, c:c + nw].mean()
    return mu


def uta(stack_data, window_half, combine=True):
    mu = np.stack([boxcar_mu(img, window_half) for img in stack_data])
    return temporal_combine(stack_data, mu) if combine else mu


def nltf(stack_data, looks, patch_half, search_half, n_similar, combine=True):
    m, height, width = stack_data.shape
    n1 = 2 * patch_half + 1
    pad = search_half + patch_half
    offsets = [(dr, dc)
               for dr in range(-search_half, search_half + 1)
               for dc in range(-search_half, search_half + 1)]
    n2 = min(n_similar, len(offsets))
    mu = np.zeros_like(stack_data)
    for t in range(m):
        p = np.pad(stack_data[t], pad, mode="reflect")
        for r in range(height):
            for c in range(width):
                d1 = np.zeros(len(offsets))
                means = np.zeros(len(offsets))
                for k, (dr, dc) in enumerate(offsets):
                    total = 0.0
                    for i in range(-patch_half, patch_half + 1):
                        for j in range(-patch_half, patch_half + 1):
                            a = p[r + pad + i, c + pad + j]
                            b = p[r + pad + dr + i, c + pad + dc + j]
                            total += log_ratio_term(a, b)
                    d1[k] = (2.0 * looks - 1.0) * total
                    means[k] = p[r + pad + dr - patch_half:r + pad + dr + patch_half + 1,
                                 c + pad + dc - patch_half:c + pad + dc + patch_half + 1].mean()
                best = np.argsort(d1, kind="stable")[:n2]
                mu[t, r, c] = means[best].mean()
    return temporal_combine(stack_data, mu) if combine else mu


def anltf(stack_data, looks, patch_half, window_half, h, combine=True):
    m, height, width = stack_data.shape
    pad = window_half + patch_half
    offsets = [(dr, dc)
               for dr in range(-window_half, window_half + 1)
               for dc in range(-window_half, window_half + 1)]
    mu = np.zeros_like(stack_data)
    for t in range(m):
        p = np.pad(stack_data[t], pad, mode="reflect")
        for r in range(height):
            for c in range(width):
                num = den = 0.0
                for dr, dc in offsets:
                    total = 0.0
                    for i in range(-patch_half, patch_half + 1):
                        for j in range(-patch_half, patch_half + 1):
                            a = p[r + pad + i, c + pad + j]
                            b = p[r + pad + dr + i, c + pad + dc + j]
                            total += log_ratio_term(a, b)
                    d1 = (2.0 * looks - 1.0) * total
                    w = math.exp(-d1 / h)
                    num += w * p[r + pad + dr, c + pad + dc]
                    den += w
                mu[t, r, c] = num / den
    return temporal_combine(stack_data, mu) if combine else mu


def quality_map(r_img, n1, displacements, patch_score_fn):
    """Aggregate per-center patch scores exactly as the map definition says."""
    h, w = r_img.shape
    lo = (n1 - 1) // 2
    hi = n1 - 1 - lo
    scores = np.full((h, w), np.nan)
    for r in range(h):
        for c in range(w):
            scores[r, c] = patch_score_fn(r_img, (r, c), n1, displacements)
    wmap = np.full((h, w), np.nan)
    for r in range(h):
        for c in range(w):
            vals = []
            for rr in range(r - hi, r + lo + 1):
                for cc in range(c - hi, c + lo + 1):
                    if 0 <= rr < h and 0 <= cc < w and not math.isnan(scores[rr, cc]):
                        vals.append(scores[rr, cc])
            if vals:
                wmap[r, c] = float(np.mean(vals))
    return wmap
