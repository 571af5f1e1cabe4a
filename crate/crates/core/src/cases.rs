//! The evaluation scenarios (cases 0 to 7) as named presets.

use crate::channel::NetworkConfig;
use crate::coding::{
    measure_awgn_fer_curve, CalibrationBudget, ConvCode, DbGrid, ErrorDetection, FerCurve, LinkCoding,
};
use crate::error::{Error, Result};
use crate::montecarlo::{Campaign, StopRule};
use crate::simulator::{Scenario, Scheme};
use crate::threshold::{snr_threshold_from_measured, snr_threshold_uncoded};

/// Uncoded BPSK modulation constant.
pub const BPSK_MOD_CONST: f64 = 2.0;

/// Relay counts (or MIMO path counts for case 0) evaluated per case.
pub const CASE_RELAY_COUNTS: [usize; 3] = [1, 2, 4];

/// Static description of a preset case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub id: u8,
    /// Frame size in channel (BPSK) symbols, tail included.
    pub frame_symbols: usize,
    pub code: Option<ConvCode>,
    pub omega0: f64,
    pub omega1: f64,
    pub omega2: f64,
}

/// Look up preset `id`.
pub fn table_case(id: u8) -> Result<CaseSpec> {
    let (frame_symbols, code, omega1) = match id {
        0 | 1 => (100, None, 1.0),
        2 => (100, None, 16.0),
        3 => (100, None, 1.0 / 16.0),
        4 => (100, Some(ConvCode::rate_half_5_7()), 1.0),
        5 => (200, Some(ConvCode::rate_half_5_7()), 1.0),
        6 => (100, Some(ConvCode::rate_two_thirds()), 1.0),
        7 => (200, Some(ConvCode::rate_two_thirds()), 1.0),
        _ => return Err(Error::InvalidConfig(format!("unknown case {id}; expected 0 to 7"))),
    };
    Ok(CaseSpec {
        id,
        frame_symbols,
        code,
        omega0: 1.0,
        omega1,
        omega2: 1.0,
    })
}

/// Relay and destination thresholds of a case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseThresholds {
    pub gamma_t1: f64,
    pub gamma_td: f64,
}

/// Default AWGN grid for calibrating coded thresholds.
pub fn default_calibration_grid() -> DbGrid {
    DbGrid {
        start: -6.0,
        stop: 10.0,
        step: 0.25,
    }
}

impl CaseSpec {
    pub fn is_mimo(&self) -> bool {
        self.id == 0
    }

    /// Information bits per frame.
    pub fn info_len(&self) -> usize {
        match &self.code {
            Some(c) => c
                .info_len_for_symbols(self.frame_symbols)
                .expect("preset frame sizes hold a terminated codeword"),
            None => self.frame_symbols,
        }
    }

    pub fn coding(&self) -> LinkCoding {
        match &self.code {
            Some(c) => LinkCoding::Coded(c.clone()),
            None => LinkCoding::Uncoded,
        }
    }

    /// Symmetric network with `n` relays at average SNR `avg_snr`.
    pub fn network(&self, n: usize, avg_snr: f64) -> Result<NetworkConfig> {
        NetworkConfig::symmetric(n, self.omega0, self.omega1, self.omega2, avg_snr)
    }

    /// Simulation scenario; for case 0, `n` is the number of receive antennas.
    pub fn scenario(
        &self,
        n: usize,
        scheme: Option<Scheme>,
        snr_grid_db: Vec<f64>,
        stop: StopRule,
        seed: u64,
    ) -> Result<Scenario> {
        let scheme = match (self.is_mimo(), scheme) {
            (true, _) => Scheme::Mimo { n_t: 1, n_r: n as u32 },
            (false, Some(Scheme::Mimo { .. })) => {
                return Err(Error::InvalidConfig("MIMO scheme only applies to case 0".into()))
            }
            (false, s) => s.unwrap_or(Scheme::Hrs),
        };
        Ok(Scenario {
            name: format!("case{}-n{}-{}", self.id, n, scheme.label()),
            scheme,
            network: self.network(n.max(1), 1.0)?,
            frame_len: self.info_len(),
            coding: self.coding(),
            detection: ErrorDetection::Genie,
            snr_grid_db,
            stop,
            seed,
            fer_floor: None,
            importance: None,
        })
    }

    /// Measure the AWGN FER curve used for coded thresholds.
    pub fn calibration_curve(&self, budget: &CalibrationBudget, campaign: &Campaign) -> Result<FerCurve> {
        measure_awgn_fer_curve(
            &self.coding(),
            self.info_len(),
            &default_calibration_grid(),
            budget,
            campaign,
        )
    }

    /// Thresholds for `n` relays: diversity one at the relays and `n + 1` at
    /// the destination. Coded cases need a calibration curve. For case 0 both
    /// entries hold the order-`n` threshold.
    pub fn thresholds(&self, n: usize, curve: Option<&FerCurve>) -> Result<CaseThresholds> {
        let dest_order = if self.is_mimo() { n as u32 } else { n as u32 + 1 };
        let relay_order = if self.is_mimo() { dest_order } else { 1 };
        let at = |d: u32| match (&self.code, curve) {
            (None, _) => snr_threshold_uncoded(d, self.frame_symbols, BPSK_MOD_CONST),
            (Some(_), Some(c)) => snr_threshold_from_measured(d, c),
            (Some(_), None) => Err(Error::InvalidConfig(format!(
                "case {} is coded and needs a calibration curve",
                self.id
            ))),
        };
        Ok(CaseThresholds {
            gamma_t1: at(relay_order)?,
            gamma_td: at(dest_order)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_cover_all_cases() {
        for id in 0..=7 {
            let c = table_case(id).unwrap();
            assert_eq!(c.code.is_some(), id >= 4);
            assert_eq!(c.frame_symbols, if id == 5 || id == 7 { 200 } else { 100 });
        }
        assert!(table_case(8).is_err());
        assert_eq!(table_case(2).unwrap().omega1, 16.0);
        assert_eq!(table_case(1).unwrap().info_len(), 100);
        assert_eq!(table_case(4).unwrap().info_len(), 48);
        assert_eq!(table_case(7).unwrap().info_len(), 124);
    }

    #[test]
    fn uncoded_thresholds_ordered() {
        let t = table_case(1).unwrap().thresholds(2, None).unwrap();
        assert!(t.gamma_t1 < t.gamma_td);
        assert!(table_case(4).unwrap().thresholds(2, None).is_err());
    }

    #[test]
    fn mimo_scenario_for_case_zero() {
        let s = table_case(0)
            .unwrap()
            .scenario(4, None, vec![0.0], StopRule::default(), 1)
            .unwrap();
        assert_eq!(s.scheme, Scheme::Mimo { n_t: 1, n_r: 4 });
    }
}
