//! Continuous-variable dense coding with the filtered output modes.
//!
//! Alice displaces mode l by a Gaussian signal of per-quadrature variance
//! V_s and sends it to Bob, who mixes it with mode r on a balanced beam
//! splitter and homodynes X₊ = (X_l + X_s + X_r)/√2 and
//! Y₋ = (Y_l + Y_s − Y_r)/√2. The mean photon number n̄ through the channel
//! splits into the source photons L − 1/2 and the signal photons V_s − 1/2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::TwoModeBlock;

/// V_B = (L + R − 2C + V_s)/2. c′ does not enter the X₊/Y₋ variances.
pub fn bob_variance(block: &TwoModeBlock, v_s: f64) -> f64 {
    0.5 * (block.big_l + block.big_r - 2.0 * block.c + v_s)
}

/// V_{A|B} = V_s − V_s²/(2V_B).
pub fn conditional_variance(v_s: f64, v_b: f64) -> Result<f64> {
    if !(v_s >= 0.0) || 2.0 * v_b < v_s {
        return Err(Error::Domain(format!(
            "conditional variance needs 2·V_B >= V_s >= 0 (V_s = {v_s}, V_B = {v_b})"
        )));
    }
    if v_s == 0.0 {
        return Ok(0.0);
    }
    Ok(v_s - v_s * v_s / (2.0 * v_b))
}

/// Signal variance under the energy constraint: V_s = (n̄ + 1) − L.
pub fn signal_variance(block: &TwoModeBlock, nbar: f64) -> f64 {
    nbar + 1.0 - block.big_l
}

/// Smallest usable n̄: all photons come from the source mode, n̄ = L − 1/2.
pub fn nbar_floor(block: &TwoModeBlock) -> f64 {
    block.big_l - 0.5
}

/// I_OM(n̄) = log₂(1 + V_s/(L + R − 2C)), bits per channel use.
pub fn rate_om(block: &TwoModeBlock, nbar: f64) -> Result<f64> {
    let floor = nbar_floor(block);
    if !(nbar >= floor) {
        return Err(Error::Domain(format!(
            "n̄ = {nbar} is below the source photon number; minimum usable n̄ is {floor}"
        )));
    }
    let noise = block.big_l + block.big_r - 2.0 * block.c;
    if !(noise > 0.0) {
        return Err(Error::Domain(format!(
            "EPR noise L + R − 2C must be positive, got {noise}"
        )));
    }
    let v_s = signal_variance(block, nbar);
    Ok((1.0 + v_s / noise).log2())
}

/// Reference rates at mean photon number n̄, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Capacities {
    /// Dense-coding capacity log₂(1 + n̄ + n̄²).
    pub i_d_opt: f64,
    /// Fock states with photon counting: (1+n̄)log₂(1+n̄) − n̄ log₂ n̄.
    pub i_f: f64,
    /// Squeezed states with homodyne: log₂(1 + 2n̄).
    pub i_s: f64,
    /// Coherent states with heterodyne: log₂(1 + n̄).
    pub i_c_het: f64,
    /// Coherent states with homodyne: log₂√(1 + 4n̄).
    pub i_c: f64,
}

pub fn capacities(nbar: f64) -> Result<Capacities> {
    if !(nbar >= 0.0) {
        return Err(Error::Domain(format!("n̄ must be >= 0, got {nbar}")));
    }
    let i_f = if nbar == 0.0 {
        0.0
    } else {
        (1.0 + nbar) * (1.0 + nbar).log2() - nbar * nbar.log2()
    };
    Ok(Capacities {
        i_d_opt: (1.0 + nbar + nbar * nbar).log2(),
        i_f,
        i_s: (1.0 + 2.0 * nbar).log2(),
        i_c_het: (1.0 + nbar).log2(),
        i_c: 0.5 * (1.0 + 4.0 * nbar).log2(),
    })
}

/// One row of a rate curve. `i_om` and `v_s` are `None` below the n̄ floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub nbar: f64,
    pub i_om: Option<f64>,
    pub i_d_opt: f64,
    pub i_f: f64,
    pub i_s: f64,
    pub i_c_het: f64,
    pub i_c: f64,
    pub v_s: Option<f64>,
    pub big_l: f64,
    pub big_r: f64,
    pub c: f64,
}

impl RatePoint {
    pub const CSV_HEADER: [&'static str; 11] = [
        "nbar", "i_om", "i_d_opt", "i_f", "i_s", "i_c_het", "i_c", "v_s", "big_l", "big_r", "c",
    ];

    /// Fields in CSV column order; `None` becomes an empty field.
    pub fn csv_record(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.nbar.to_string(),
            opt(self.i_om),
            self.i_d_opt.to_string(),
            self.i_f.to_string(),
            self.i_s.to_string(),
            self.i_c_het.to_string(),
            self.i_c.to_string(),
            opt(self.v_s),
            self.big_l.to_string(),
            self.big_r.to_string(),
            self.c.to_string(),
        ]
    }
}

pub fn rate_point(block: &TwoModeBlock, nbar: f64) -> Result<RatePoint> {
    let caps = capacities(nbar)?;
    let i_om = rate_om(block, nbar).ok();
    Ok(RatePoint {
        nbar,
        i_om,
        i_d_opt: caps.i_d_opt,
        i_f: caps.i_f,
        i_s: caps.i_s,
        i_c_het: caps.i_c_het,
        i_c: caps.i_c,
        v_s: i_om.map(|_| signal_variance(block, nbar)),
        big_l: block.big_l,
        big_r: block.big_r,
        c: block.c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmsv(r: f64) -> TwoModeBlock {
        TwoModeBlock {
            big_l: (2.0 * r).cosh() / 2.0,
            big_r: (2.0 * r).cosh() / 2.0,
            c: (2.0 * r).sinh() / 2.0,
            c_prime: 0.0,
            asymmetry: 0.0,
        }
    }

    #[test]
    fn bob_variance_examples() {
        assert_eq!(bob_variance(&TwoModeBlock::vacuum(), 1.0), 1.0);
        let v = bob_variance(&tmsv(1.0), 0.5);
        assert!((v - ((-2.0f64).exp() + 0.5) / 2.0).abs() < 1e-12);
        assert!((v - 0.3177).abs() < 1e-4);
        let epr = TwoModeBlock {
            big_l: 3.0,
            big_r: 2.0,
            c: 2.5,
            ..TwoModeBlock::vacuum()
        };
        assert_eq!(bob_variance(&epr, 0.5), 0.25);
    }

    #[test]
    fn conditional_variance_examples() {
        assert_eq!(conditional_variance(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(conditional_variance(0.0, 1.0).unwrap(), 0.0);
        assert!(conditional_variance(1e-12, 1.0).unwrap() < 1e-11);
        assert_eq!(conditional_variance(2.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            conditional_variance(3.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rate_examples() {
        let i = rate_om(&TwoModeBlock::vacuum(), 1.0).unwrap();
        assert!((i - 2.5f64.log2()).abs() < 1e-15);
        assert!((i - 1.3219).abs() < 1e-4);

        let b = tmsv(1.0);
        let v_s = 3.0 - 2.0f64.cosh() / 2.0;
        assert!((signal_variance(&b, 2.0) - v_s).abs() < 1e-12);
        let i = rate_om(&b, 2.0).unwrap();
        assert!((i - (1.0 + v_s / (-2.0f64).exp()).log2()).abs() < 1e-12);
        assert!((i - 3.212).abs() < 1e-3, "{i}");

        let i0 = rate_om(&TwoModeBlock::vacuum(), 1e-300).unwrap();
        assert!((i0 - 1.5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn rate_matches_chain_through_conditional_variance() {
        let b = TwoModeBlock {
            big_l: 1.9,
            big_r: 1.8,
            c: 1.7,
            c_prime: 0.01,
            asymmetry: 0.0,
        };
        for nbar in [1.5, 2.0, 5.0, 9.0] {
            let v_s = signal_variance(&b, nbar);
            let v_b = bob_variance(&b, v_s);
            let chain = (v_s / conditional_variance(v_s, v_b).unwrap()).log2();
            assert!((chain - rate_om(&b, nbar).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_below_floor_names_minimum() {
        let b = TwoModeBlock {
            big_l: 2.0,
            ..TwoModeBlock::vacuum()
        };
        match rate_om(&b, 1.0) {
            Err(Error::Domain(msg)) => assert!(msg.contains("1.5"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let p = rate_point(&b, 1.0).unwrap();
        assert!(p.i_om.is_none() && p.v_s.is_none());
        assert_eq!(p.csv_record()[1], "");
    }

    #[test]
    fn capacity_values() {
        let z = capacities(0.0).unwrap();
        for v in [z.i_d_opt, z.i_f, z.i_s, z.i_c_het, z.i_c] {
            assert_eq!(v, 0.0);
        }
        let one = capacities(1.0).unwrap();
        assert!((one.i_d_opt - 3f64.log2()).abs() < 1e-12);
        assert!((one.i_f - 2.0).abs() < 1e-12);
        assert!((one.i_s - 3f64.log2()).abs() < 1e-12);
        assert!((one.i_c_het - 1.0).abs() < 1e-12);
        assert!((one.i_c - 5f64.sqrt().log2()).abs() < 1e-12);
        let two = capacities(2.0).unwrap();
        assert!((two.i_c - 3f64.log2()).abs() < 1e-12);
        assert!((two.i_c_het - 3f64.log2()).abs() < 1e-12);
        assert!(capacities(-0.1).is_err());
    }

    #[test]
    fn csv_header_order() {
        assert_eq!(
            RatePoint::CSV_HEADER.join(","),
            "nbar,i_om,i_d_opt,i_f,i_s,i_c_het,i_c,v_s,big_l,big_r,c"
        );
    }
}
