//! Maximum-likelihood decoding of random codes, against the random-coding
//! bound e^{-n E_r(R)}.

use channel_nts::baselines::bsc;
use channel_nts::exponents::error_exponent;
use channel_nts::prob::{Distribution, RngStream};
use channel_nts::sim::{generate_codebook, ml_decode, transmit};

pub fn run_example() -> anyhow::Result<(f64, f64)> {
    let p = bsc(0.1)?;
    let q = Distribution::uniform(2)?;
    let (n, rate, trials) = (40, 0.2, 300u64);
    let mut errors = 0;
    for i in 0..trials {
        let cb = generate_codebook(&q, n, rate, 1, i)?;
        let sent = RngStream::derive(1, 0, i).below(cb.len() as u64) as usize;
        let y = transmit(cb.word(sent), &p, &mut RngStream::derive(1, 1, i))?;
        if ml_decode(&cb, &y, &p)?.map(|(m, _)| m) != Some(sent) {
            errors += 1;
        }
    }
    let rate_err = errors as f64 / trials as f64;
    let bound = (-(n as f64) * error_exponent(rate, &q, &p)?.value).exp();
    println!("n = {n}, R = {rate}: {errors} errors in {trials} codes, rate {rate_err:.4}, bound {bound:.4}");
    Ok((rate_err, bound))
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
