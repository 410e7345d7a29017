//! Two sources sharing one relay. Each user runs its own single-user code; `A`
//! copies of user 1's code and `B` of user 2's are time-shared, giving the rate pair
//! `(A k1, B k2) / max(A n1', B n1'', A n2' + B n2'')`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf::next_prime_power;
use crate::params::{rate_f64, Rate, SchemeParams};

pub const DEFAULT_MIX_BOUND: u64 = 64;

/// `T`, first-link budgets `N1`, `N2` of the two sources, relay budget `N3`, and each
/// user's threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MacParams {
    pub t: usize,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub j1: usize,
    pub j2: usize,
}

impl MacParams {
    pub fn users(&self) -> Result<[SchemeParams; 2]> {
        Ok([SchemeParams::new(self.t, self.n1, self.n3, self.j1)?, SchemeParams::new(self.t, self.n2, self.n3, self.j2)?])
    }

    pub fn user_bounds(&self) -> Result<[Rate; 2]> {
        Ok([pp_capacity(self.t - self.n3, self.n1)?, pp_capacity(self.t - self.n3, self.n2)?])
    }

    /// Nonadaptive sum-rate bound `C(T-N2, N3)`.
    pub fn sumrate_bound(&self) -> Result<Rate> {
        if self.n2 > self.t {
            return Err(Error::InvalidParams(format!("N2={} exceeds T={}", self.n2, self.t)));
        }
        pp_capacity(self.t - self.n2, self.n3)
    }
}

/// Point-to-point streaming capacity `C(T, N) = (T+1-N)/(T+1)`.
pub fn pp_capacity(t: usize, n: usize) -> Result<Rate> {
    if n > t {
        return Err(Error::InvalidParams(format!("C(T, N) needs N <= T (T={t}, N={n})")));
    }
    Ok(Rate::new((t + 1 - n) as u64, (t + 1) as u64))
}

/// `(nominal, implemented)` field size shared by both users' codes.
pub fn region_field_size(mac: &MacParams) -> Result<(u32, u32)> {
    let [u1, u2] = mac.users()?;
    let nominal = u1.nominal_field_size().max(u2.nominal_field_size());
    Ok((nominal, next_prime_power(nominal)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionPoint {
    pub a: u64,
    pub b: u64,
    pub r1: Rate,
    pub r2: Rate,
    pub on_frontier: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateRegion {
    pub params: MacParams,
    pub mix_bound: u64,
    /// Distinct rate pairs, sorted by `(r1, r2)`.
    pub points: Vec<RegionPoint>,
    pub user_bounds: [Rate; 2],
    pub sumrate_bound: Rate,
}

impl RateRegion {
    pub fn frontier(&self) -> impl Iterator<Item = &RegionPoint> {
        self.points.iter().filter(|p| p.on_frontier)
    }

    pub fn contains(&self, r1: Rate, r2: Rate) -> bool {
        self.points.iter().any(|p| p.r1 == r1 && p.r2 == r2)
    }

    /// Fraction of frontier points whose sum rate exceeds the nonadaptive bound.
    pub fn frontier_fraction_above_sumrate(&self) -> f64 {
        let (above, total) =
            self.frontier().fold((0, 0), |(a, n), p| (a + (p.r1 + p.r2 > self.sumrate_bound) as usize, n + 1));
        if total == 0 {
            0.0
        } else {
            above as f64 / total as f64
        }
    }
}

/// Every time-sharing combination with `A, B` in `[0, M]`, `A + B >= 1`.
pub fn build_region(mac: &MacParams, mix_bound: u64) -> Result<RateRegion> {
    let users = mac.users()?;
    let dims = users.map(|u| u.dims());
    let (k1, k2) = (dims[0].k_src as u64, dims[1].k_src as u64);
    let mut points: Vec<RegionPoint> = Vec::new();
    for a in 0..=mix_bound {
        for b in 0..=mix_bound {
            if a + b == 0 {
                continue;
            }
            let n = (a * dims[0].n1 as u64)
                .max(b * dims[1].n1 as u64)
                .max(a * dims[0].n2_star as u64 + b * dims[1].n2_star as u64);
            points.push(RegionPoint { a, b, r1: Rate::new(a * k1, n), r2: Rate::new(b * k2, n), on_frontier: false });
        }
    }
    points.sort_by(|x, y| (x.r1, x.r2).cmp(&(y.r1, y.r2)));
    points.dedup_by(|x, y| x.r1 == y.r1 && x.r2 == y.r2);
    // sorted by r1 ascending: a point is dominated iff some later point has r2 at least as large
    let mut best_r2: Option<Rate> = None;
    for p in points.iter_mut().rev() {
        p.on_frontier = best_r2.is_none_or(|b| p.r2 > b);
        if p.on_frontier {
            best_r2 = Some(p.r2);
        }
    }
    Ok(RateRegion { params: *mac, mix_bound, points, user_bounds: mac.user_bounds()?, sumrate_bound: mac.sumrate_bound()? })
}

pub fn emit_region_csv(mac: &MacParams, mix_bound: u64) -> Result<String> {
    let region = build_region(mac, mix_bound)?;
    let mut out = String::new();
    let (nominal, implemented) = region_field_size(mac)?;
    writeln!(
        out,
        "# T={} N1={} N2={} N3={} j1={} j2={} M={} q_nominal={} q_implemented={}",
        mac.t, mac.n1, mac.n2, mac.n3, mac.j1, mac.j2, mix_bound, nominal, implemented
    )
    .unwrap();
    out.push_str("R1,R2,R1_float,R2_float,on_frontier,sumrate_bound\n");
    for p in &region.points {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{},{}",
            p.r1,
            p.r2,
            rate_f64(p.r1),
            rate_f64(p.r2),
            p.on_frontier as u8,
            region.sumrate_bound
        )
        .unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG: MacParams = MacParams { t: 7, n1: 3, n2: 2, n3: 4, j1: 2, j2: 1 };

    #[test]
    fn capacity_values() {
        assert_eq!(pp_capacity(5, 4).unwrap(), Rate::new(1, 3));
        assert_eq!(pp_capacity(6, 0).unwrap(), Rate::from_integer(1));
        assert_eq!(pp_capacity(6, 6).unwrap(), Rate::new(1, 7));
        assert!(pp_capacity(3, 4).is_err());
    }

    #[test]
    fn corners_and_bounds() {
        let r = build_region(&FIG, DEFAULT_MIX_BOUND).unwrap();
        assert!(r.contains(Rate::new(1, 4), Rate::from_integer(0)));
        assert!(r.contains(Rate::from_integer(0), Rate::new(2, 5)));
        assert_eq!(r.sumrate_bound, Rate::new(1, 3));
        assert!(r.points.iter().all(|p| p.r1 <= r.user_bounds[0] && p.r2 <= r.user_bounds[1]));
        assert!(r.frontier().any(|p| p.r1 + p.r2 > r.sumrate_bound));
    }

    #[test]
    fn frontier_is_nondominated() {
        let r = build_region(&FIG, 16).unwrap();
        let front: Vec<_> = r.frontier().collect();
        for p in &r.points {
            let dominated = r.points.iter().any(|o| o.r1 >= p.r1 && o.r2 >= p.r2 && (o.r1 > p.r1 || o.r2 > p.r2));
            assert_eq!(p.on_frontier, !dominated);
        }
        assert!(!front.is_empty());
    }

    #[test]
    fn minimal_mix_bound() {
        let r = build_region(&FIG, 1).unwrap();
        assert!(r.points.len() <= 3);
    }

    #[test]
    fn region_grows_with_mix_bound() {
        let small = build_region(&FIG, 8).unwrap();
        let large = build_region(&FIG, 24).unwrap();
        for p in small.points.iter() {
            assert!(large.points.iter().any(|o| o.r1 >= p.r1 && o.r2 >= p.r2));
        }
    }

    #[test]
    fn field_sizes() {
        assert_eq!(region_field_size(&FIG).unwrap(), (7, 7));
        let z = MacParams { j1: 0, j2: 0, ..FIG };
        assert_eq!(region_field_size(&z).unwrap().0, 8);
    }

    #[test]
    fn csv_shape() {
        let csv = emit_region_csv(&FIG, 1).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# T=7"));
        assert_eq!(lines[1], "R1,R2,R1_float,R2_float,on_frontier,sumrate_bound");
        assert!(lines[2..].iter().all(|l| l.ends_with(",1/3")));
    }
}
