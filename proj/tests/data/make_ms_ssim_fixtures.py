"""Writes gray image pairs and tf.image.ssim_multiscale reference scores."""

import json
import pathlib

import numpy as np
import tensorflow as tf

OUT = pathlib.Path(__file__).resolve().parent / "ms_ssim"


def write_pgm(path, img):
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(img.astype(np.uint8).tobytes())


def page(rng, h, w):
    img = np.full((h, w), 235.0)
    y = 12
    while y < h - 12:
        x0 = rng.integers(8, 30)
        x1 = w - rng.integers(8, 60)
        img[y : y + 4, x0:x1] = rng.uniform(0, 60)
        y += rng.integers(9, 14)
    return img


def blur(img):
    k = np.array([1, 4, 6, 4, 1], float) / 16
    pad = np.pad(img, 2, mode="edge")
    tmp = sum(k[i] * pad[:, i : i + img.shape[1]] for i in range(5))
    return sum(k[i] * tmp[i : i + img.shape[0], :] for i in range(5))


def cases(rng):
    base = page(rng, 200, 180)
    yield "noise", base, base + rng.normal(0, 12, base.shape)
    yield "blur", base, blur(base)
    yield "shift", base, np.roll(base, 2, axis=1)
    yield "contrast", base, 128 + 0.6 * (base - 128)
    yield "brightness", base, base - 25
    odd = page(rng, 203, 181)
    yield "odd_size_noise", odd, odd + rng.normal(0, 25, odd.shape)
    yield "odd_size_shift", odd, np.roll(odd, (3, 1), axis=(0, 1))
    yield "inverted", base, 255 - base
    yield "random", rng.uniform(0, 255, (192, 190)), rng.uniform(0, 255, (192, 190))
    grad = np.tile(np.linspace(0, 255, 256), (180, 1))
    yield "gradient_blocks", grad, np.where((np.indices(grad.shape).sum(0) // 16) % 2 == 0, grad, 255 - grad)


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(20240601)
    meta = []
    for name, a, b in cases(rng):
        a = np.clip(np.rint(a), 0, 255).astype(np.uint8)
        b = np.clip(np.rint(b), 0, 255).astype(np.uint8)
        write_pgm(OUT / f"{name}_a.pgm", a)
        write_pgm(OUT / f"{name}_b.pgm", b)
        ta = tf.constant(a[None, :, :, None], tf.float64)
        tb = tf.constant(b[None, :, :, None], tf.float64)
        score = float(tf.image.ssim_multiscale(ta, tb, max_val=255.0)[0])
        meta.append({"name": name, "a": f"{name}_a.pgm", "b": f"{name}_b.pgm", "ms_ssim": score})
    (OUT / "expected.json").write_text(json.dumps(meta, indent=2) + "\n")


if __name__ == "__main__":
    main()
