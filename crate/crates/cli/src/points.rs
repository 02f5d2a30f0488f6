//! Point list syntax for `--points`.
//!
//! | form | meaning |
//! |------|---------|
//! | `1.5,2,4` | explicit list |
//! | `1,2,3,...,50` | arithmetic progression from the last two terms |
//! | `0..20` | integers `0` through `20` inclusive |
//! | `sparse:i*(i-1)/2` | `i(i−1)/2` for `i = 2, …, count + 1` |
//! | `uniform:h` | `i·h` for `i = 1, …, count` |
//!
//! Anything else is read as a file of numbers separated by commas or
//! whitespace.

use anyhow::{bail, Context, Result};

pub fn parse_points(spec: &str, count: usize) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("sparse:") {
        if rest.replace(' ', "") != "i*(i-1)/2" {
            bail!("unknown sparse generator {rest:?}");
        }
        return Ok((2..=count as u64 + 1).map(|i| (i * (i - 1) / 2) as f64).collect());
    }
    if let Some(rest) = spec.strip_prefix("uniform:") {
        let h: f64 = rest.parse().with_context(|| format!("bad spacing {rest:?}"))?;
        if h <= 0.0 || !h.is_finite() {
            bail!("spacing must be positive, got {h}");
        }
        return Ok((1..=count).map(|i| i as f64 * h).collect());
    }
    if let Some((a, b)) = spec.split_once("..") {
        if !spec.contains(',') {
            if let (Ok(a), Ok(b)) = (a.trim().parse::<i64>(), b.trim().parse::<i64>()) {
                if b < a {
                    bail!("empty range {spec}");
                }
                return Ok((a..=b).map(|i| i as f64).collect());
            }
        }
    }
    if spec.contains(',') {
        return parse_list(spec);
    }
    if let Ok(x) = spec.parse::<f64>() {
        return Ok(vec![x]);
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("cannot read points file {spec}"))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad number {s:?} in {spec}")))
        .collect()
}

fn parse_list(spec: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = spec.split(',').map(str::trim).collect();
    let mut out: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = items[i];
        if item == "..." {
            let end: f64 = items
                .get(i + 1)
                .context("\"...\" needs an end value")?
                .parse()
                .context("bad end value after \"...\"")?;
            let [.., a, b] = out[..] else {
                bail!("\"...\" needs two terms before it");
            };
            let step: f64 = b - a;
            if !step.is_finite() || step <= 0.0 {
                bail!("\"...\" needs an increasing progression");
            }
            let mut k = 1.0;
            loop {
                let x = b + k * step;
                if x > end + step * 1e-9 {
                    break;
                }
                out.push(x);
                k += 1.0;
            }
            if out.last() != Some(&end) {
                bail!("{end} is not on the progression {a}, {b}, ...");
            }
            i += 2;
            continue;
        }
        out.push(item.parse().with_context(|| format!("bad number {item:?}"))?);
        i += 1;
    }
    Ok(out)
}
