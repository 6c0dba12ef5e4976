//! Discrete Fourier transforms of arbitrary length: iterative radix-2 for
//! powers of two, Bluestein's chirp-z reduction otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// In-place forward DFT `X_k = sum_j x_j exp(-2 pi i jk/n)`, unnormalized.
pub fn fft(x: &mut [Complex64]) {
    let n = x.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(x, false);
    } else {
        bluestein(x);
    }
}

/// In-place inverse DFT, normalized by `1/n`.
pub fn ifft(x: &mut [Complex64]) {
    let n = x.len();
    if n <= 1 {
        return;
    }
    x.iter_mut().for_each(|z| *z = z.conj());
    fft(x);
    let s = 1.0 / n as f64;
    x.iter_mut().for_each(|z| *z = z.conj() * s);
}

fn radix2(x: &mut [Complex64], inverse: bool) {
    let n = x.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            x.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // twiddles computed directly to avoid accumulating rounding
        let tw: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, ang * k as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = x[start + k];
                let b = x[start + k + half] * tw[k];
                x[start + k] = a + b;
                x[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn bluestein(x: &mut [Complex64]) {
    let n = x.len();
    let m = (2 * n - 1).next_power_of_two();
    // w_k = exp(-i pi k^2 / n), with k^2 reduced mod 2n for accuracy
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
            Complex64::from_polar(1.0, -PI * k2 / n as f64)
        })
        .collect();
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = x[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    radix2(&mut a, false);
    radix2(&mut b, false);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    radix2(&mut a, true);
    let s = 1.0 / m as f64;
    for k in 0..n {
        x[k] = a[k] * s * chirp[k];
    }
}

/// `|X_k|` for `k = 0 ..= n/2` of a real signal.
pub fn real_magnitude(x: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf);
    buf.iter().take(x.len() / 2 + 1).map(|z| z.norm()).collect()
}

/// Hann window of length `n` (periodic-free, symmetric form).
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let ang = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                        x[j] * Complex64::from_polar(1.0, ang)
                    })
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                let t = k as f64;
                Complex64::new((0.37 * t).sin() + 0.1 * t.cos(), (1.3 * t).cos() - 0.2)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_many_lengths() {
        for n in [1usize, 2, 3, 5, 8, 12, 16, 17, 31, 64, 100, 127, 256, 1000] {
            let x = signal(n);
            let want = naive(&x);
            let mut got = x.clone();
            fft(&mut got);
            let scale = want.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let err = got
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-11 * scale, "n={n} err={err:e}");
        }
    }

    #[test]
    fn inverse_round_trips() {
        for n in [7usize, 32, 45] {
            let x = signal(n);
            let mut y = x.clone();
            fft(&mut y);
            ifft(&mut y);
            let err = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn pure_tone_peaks_at_its_bin() {
        let n = 3000;
        let x: Vec<f64> = (0..n)
            .map(|k| (2.0 * PI * 37.0 * k as f64 / n as f64).cos())
            .collect();
        let mag = real_magnitude(&x);
        let peak = (1..mag.len())
            .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
            .unwrap();
        assert_eq!(peak, 37);
        assert!((mag[37] - n as f64 / 2.0).abs() < 1e-8);
    }
}
