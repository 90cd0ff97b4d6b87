//! Minimal radix-2 FFT, used only for the long convolution in the flicker
//! noise generator. Deterministic, power-of-two sizes.

fn bit_reverse_permute(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
        let mut mask = n >> 1;
        while mask > 0 && j & mask != 0 {
            j ^= mask;
            mask >>= 1;
        }
        j |= mask;
    }
}

/// In-place complex FFT; `inverse` applies the conjugate transform without
/// the 1/n scaling (the caller scales).
pub(crate) fn fft(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    assert_eq!(n, im.len());
    assert!(n.is_power_of_two(), "fft size must be a power of two");
    if n <= 1 {
        return;
    }
    bit_reverse_permute(re, im);

    // Twiddle table for the full circle, computed directly per index so
    // rounding does not accumulate across stages.
    let half = n / 2;
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut tw_re = Vec::with_capacity(half);
    let mut tw_im = Vec::with_capacity(half);
    for k in 0..half {
        let ang = sign * 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let (s, c) = ang.sin_cos();
        tw_re.push(c);
        tw_im.push(s);
    }

    let mut len = 2usize;
    while len <= n {
        let stride = n / len;
        let half_len = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half_len {
                let w_re = tw_re[k * stride];
                let w_im = tw_im[k * stride];
                let i = start + k;
                let j = i + half_len;
                let t_re = re[j] * w_re - im[j] * w_im;
                let t_im = re[j] * w_im + im[j] * w_re;
                re[j] = re[i] - t_re;
                im[j] = im[i] - t_im;
                re[i] += t_re;
                im[i] += t_im;
            }
        }
        len <<= 1;
    }
}

/// Full linear convolution of two real sequences, length `a + b - 1`.
/// Both inputs ride one complex FFT via the standard packing trick.
pub(crate) fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut re = vec![0.0; size];
    let mut im = vec![0.0; size];
    re[..a.len()].copy_from_slice(a);
    im[..b.len()].copy_from_slice(b);
    fft(&mut re, &mut im, false);

    // Spectra of the packed pair: A(k) = (Z(k) + conj(Z(-k)))/2,
    // B(k) = (Z(k) - conj(Z(-k)))/(2i); store A*B back for the inverse.
    let mut pr = vec![0.0; size];
    let mut pi = vec![0.0; size];
    for k in 0..size {
        let kc = (size - k) % size;
        let (zr, zi) = (re[k], im[k]);
        let (cr, ci) = (re[kc], -im[kc]);
        let (ar, ai) = ((zr + cr) / 2.0, (zi + ci) / 2.0);
        let (br, bi) = ((zi - ci) / 2.0, (cr - zr) / 2.0);
        pr[k] = ar * br - ai * bi;
        pi[k] = ar * bi + ai * br;
    }
    fft(&mut pr, &mut pi, true);
    let scale = 1.0 / size as f64;
    pr.truncate(out_len);
    for v in &mut pr {
        *v *= scale;
    }
    pr
}
