use chunkqe::cost::{param_count, pipeline_flops, CostParams, Variant, Workload, STANDARD_CONFIGS};

use super::Check;

/// Published parameter counts, rounded to the nearest million.
pub const REFERENCE_PARAMS: [(Variant, f64); 5] = [
    (Variant::Tiny, 4e6),
    (Variant::Small, 11e6),
    (Variant::Medium, 41e6),
    (Variant::Base, 109e6),
    (Variant::Large, 335e6),
];

/// Published FLOPs of each configuration relative to Large alone.
pub const REFERENCE_RATIOS: [(&str, f64); 13] = [
    ("LLL", 11.19),
    ("LTL", 11.00),
    ("LSL", 11.00),
    ("LML", 11.01),
    ("LBL", 11.05),
    ("LMT", 1.03),
    ("LMS", 1.12),
    ("LMM", 1.85),
    ("LMB", 3.83),
    ("LLT", 1.20),
    ("LLS", 1.30),
    ("LLM", 2.03),
    ("LLB", 4.01),
];

pub fn check_param_counts() -> Check {
    let mut misses = Vec::new();
    for (v, reference) in REFERENCE_PARAMS {
        let got = param_count(v) as f64;
        let rel = (got - reference) / reference;
        if rel.abs() > 0.05 {
            misses.push(format!("{v}: {got} is {:+.1}% from {reference}", rel * 100.0));
        }
    }
    ensure!(misses.is_empty(), "{}", misses.join("; "));
    Ok(())
}

pub fn ratios() -> Result<Vec<(&'static str, f64)>, String> {
    STANDARD_CONFIGS
        .iter()
        .map(|name| {
            let models = name.parse().map_err(|e| format!("{e}"))?;
            let r = pipeline_flops(models, CostParams::default(), &Workload::default())
                .map_err(|e| format!("{e}"))?;
            Ok((*name, r.ratio))
        })
        .collect()
}

pub fn check_flops_ratios() -> Check {
    let computed = ratios()?;
    let get = |n: &str| computed.iter().find(|c| c.0 == n).map(|c| c.1).unwrap_or(f64::NAN);
    let lll = get("LLL");
    ensure!((lll - 11.19).abs() <= 0.15 * 11.19, "LLL ratio {lll:.3} outside 11.19 +-15%");
    let lls = get("LLS") - 1.0;
    ensure!((lls - 0.30).abs() <= 0.25 * 0.30, "LLS overhead {lls:.4} outside 0.30 +-25%");
    let lmt = get("LMT") - 1.0;
    ensure!((lmt - 0.03).abs() <= 0.50 * 0.03, "LMT overhead {lmt:.4} outside 0.03 +-50%");
    // weak order: reference pairs more than 2% apart must keep their order
    for (a, ra) in REFERENCE_RATIOS {
        for (b, rb) in REFERENCE_RATIOS {
            if ra * 1.02 < rb {
                ensure!(get(a) < get(b), "{a} ({:.3}) should rank below {b} ({:.3})", get(a), get(b));
            }
        }
    }
    Ok(())
}
