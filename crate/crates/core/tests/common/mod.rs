#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starseg::{dilated_kernel_2d, BinaryMask, Image};

/// Whole-sample symmetric reflection, written independently of the library.
pub fn reflect_index(i: i64, n: usize) -> usize {
    let n = n as i64;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Dense 2D convolution with the full `side x side` level-`j` kernel
/// (zeros included) and mirror boundaries. The correctness reference for
/// the separable implementation.
pub fn dense_smooth(img: &Image, level: usize) -> Image {
    let k = dilated_kernel_2d(level).unwrap();
    let half = (k.side() / 2) as i64;
    let (w, h) = img.dims();
    Image::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for ky in 0..k.side() {
            for kx in 0..k.side() {
                let sy = reflect_index(y as i64 + ky as i64 - half, h);
                let sx = reflect_index(x as i64 + kx as i64 - half, w);
                acc += k.at(ky, kx) * img.get(sx, sy);
            }
        }
        acc
    })
    .unwrap()
}

/// `c_0 .. c_L` via repeated dense smoothing.
pub fn dense_chain(img: &Image, levels: usize) -> Vec<Image> {
    let mut planes = vec![img.clone()];
    for j in 1..=levels {
        let next = dense_smooth(planes.last().unwrap(), j);
        planes.push(next);
    }
    planes
}

pub fn random_image(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::from_fn(w, h, |_, _| rng.gen::<f64>()).unwrap()
}

pub fn random_mask(w: usize, h: usize, density: f64, seed: u64) -> BinaryMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::new(w, h, bits).unwrap()
}

/// Per-pixel tally `(tp, fp, fn, tn)` by direct enumeration.
pub fn tally(pred: &BinaryMask, gt: &BinaryMask) -> (u64, u64, u64, u64) {
    let mut t = (0, 0, 0, 0);
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            let (p, g) = (pred.get(x, y), gt.get(x, y));
            if p && g {
                t.0 += 1;
            } else if p {
                t.1 += 1;
            } else if g {
                t.2 += 1;
            } else {
                t.3 += 1;
            }
        }
    }
    t
}

/// The 10x10 worked example: truth is the top row; the prediction keeps
/// columns 2..10 of it and adds the first two pixels of row 1.
pub fn ten_by_ten() -> (BinaryMask, BinaryMask) {
    let gt = BinaryMask::new(10, 10, (0..100).map(|i| i < 10).collect()).unwrap();
    let pred = BinaryMask::new(10, 10, (0..100).map(|i| (2..12).contains(&i)).collect()).unwrap();
    (pred, gt)
}

/// Header mutants of a valid 3x2 PGM that every parser path must reject.
pub fn malformed_headers() -> Vec<(&'static str, Vec<u8>)> {
    let payload6 = [1u8, 2, 3, 4, 5, 6];
    let bin = |head: &str| {
        let mut v = head.as_bytes().to_vec();
        v.extend_from_slice(&payload6);
        v
    };
    let asc = |s: &str| s.as_bytes().to_vec();
    vec![
        ("empty", vec![]),
        ("one byte", asc("P")),
        ("wrong magic letter", bin("Q5\n3 2\n255\n")),
        ("lowercase magic", bin("p5\n3 2\n255\n")),
        ("unknown variant", bin("P9\n3 2\n255\n")),
        ("color ppm", bin("P6\n1 2\n255\n")),
        ("bitmap pbm", asc("P1\n3 2\n1 0 1 0 1 0\n")),
        ("magic glued to width", bin("P53 2\n255\n")),
        ("negative width", bin("P5\n-3 2\n255\n")),
        ("negative height", asc("P2\n3 -2\n255\n1 2 3 4 5 6\n")),
        ("zero width", bin("P5\n0 2\n255\n")),
        ("zero height", bin("P5\n3 0\n255\n")),
        ("maxval zero", bin("P5\n3 2\n0\n")),
        ("maxval too large", bin("P5\n3 2\n65536\n")),
        ("non-numeric width", bin("P5\nabc 2\n255\n")),
        ("float width", bin("P5\n3.5 2\n255\n")),
        ("missing maxval", asc("P5\n3 2")),
        ("missing height", asc("P2\n3")),
        ("header only", asc("P5\n3 2\n255\n")),
        ("short binary payload", asc("P5\n3 2\n255\n\x01\x02")),
        ("short ascii payload", asc("P2\n3 2\n255\n0 1 2 3 4")),
        (
            "ascii sample over maxval",
            asc("P2\n3 2\n10\n0 1 2 3 4 11\n"),
        ),
        ("ascii garbage sample", asc("P2\n3 2\n255\n0 1 x 3 4 5\n")),
        (
            "16-bit short payload",
            asc("P5\n3 2\n1000\n\x00\x01\x00\x02"),
        ),
        ("huge dimensions", bin("P5\n99999999999 2\n255\n")),
        ("maxval glued to payload", asc("P5\n3 2\n255")),
        (
            "png signature only",
            vec![0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a],
        ),
    ]
}
