//! Slow, independent reference implementations used to validate the
//! production kernels. Compiled for unit tests and behind the `reference`
//! feature for external validation suites; not part of the regular API.

/// Singleton-count distribution by enumerating all m^x preamble choices.
/// Exact up to one f64 division per mass; only viable for tiny x and m.
pub fn occupancy_by_enumeration(x: u32, m: u32) -> Vec<f64> {
    assert!(m >= 1);
    assert!(
        (m as u64).pow(x) <= 1 << 32,
        "enumeration only supports tiny instances"
    );
    let k_cap = x.min(m) as usize;
    let mut counts = vec![0u64; k_cap + 1];
    let mut choice = vec![0u32; x as usize];
    let mut bins = vec![0u32; m as usize];
    loop {
        bins.fill(0);
        for &c in &choice {
            bins[c as usize] += 1;
        }
        let singles = bins.iter().filter(|&&b| b == 1).count();
        counts[singles] += 1;

        // Odometer over the x-digit base-m counter.
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                let total = (m as u64).pow(x);
                let total_counted: u64 = counts.iter().sum();
                assert_eq!(total_counted, total, "enumeration must cover all placements");
                return counts.iter().map(|&c| c as f64 / total as f64).collect();
            }
            choice[pos] += 1;
            if choice[pos] < m {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Singleton-count distribution via the alternating inclusion-exclusion count,
/// evaluated exactly in 128-bit integers: the number of placements of x balls
/// into m bins with exactly k singletons is
///   C(x,k) C(m,k) k! * sum_j (-1)^j C(m-k,j) C(x-k,j) j! (m-k-j)^(x-k-j).
/// Safe for x, m up to ~18 before i128 overflow.
pub fn occupancy_by_inclusion_exclusion(x: u32, m: u32) -> Vec<f64> {
    assert!(m >= 1);
    assert!(x <= 18 && m <= 18, "kept within exact i128 range");
    let total = pow_i128(m as i128, x);
    let k_cap = x.min(m);
    let counts: Vec<i128> = (0..=k_cap).map(|k| placements_with_k_singletons(x, m, k)).collect();
    let covered: i128 = counts.iter().sum();
    assert_eq!(covered, total, "counts must cover all placements");
    counts
        .iter()
        .map(|&c| {
            assert!(c >= 0, "placement count cannot be negative");
            c as f64 / total as f64
        })
        .collect()
}

fn placements_with_k_singletons(x: u32, m: u32, k: u32) -> i128 {
    let prefactor = binomial_i128(x, k) * binomial_i128(m, k) * factorial_i128(k);
    let j_max = (m - k).min(x - k);
    let mut inner = 0i128;
    for j in 0..=j_max {
        let term = binomial_i128(m - k, j)
            * binomial_i128(x - k, j)
            * factorial_i128(j)
            * pow_i128((m - k - j) as i128, x - k - j);
        if j % 2 == 0 {
            inner += term;
        } else {
            inner -= term;
        }
    }
    prefactor * inner
}

fn binomial_i128(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1i128;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

fn factorial_i128(n: u32) -> i128 {
    (1..=n as i128).product()
}

/// b^e with the 0^0 = 1 convention the inclusion-exclusion sum needs.
fn pow_i128(b: i128, e: u32) -> i128 {
    (0..e).fold(1i128, |acc, _| acc * b)
}
