use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EstimatorMode;
use crate::elements::Family;
use crate::error::Result;

/// `Theta_K` with its squared contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalIndicator {
    pub theta: f64,
    pub volume: f64,
    pub flux: f64,
    pub conduit: f64,
    pub nonconformity: f64,
}

impl LocalIndicator {
    pub fn new(volume: f64, flux: f64, conduit: f64, nonconformity: f64) -> Self {
        LocalIndicator {
            theta: (volume + flux + conduit + nonconformity).sqrt(),
            volume,
            flux,
            conduit,
            nonconformity,
        }
    }
}

/// Field an alignment measure was computed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentValue {
    pub field: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub mode: EstimatorMode,
    pub family: Family,
    pub theta: f64,
    pub zeta: f64,
    pub elements: Vec<LocalIndicator>,
    pub zeta_local: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alignment: Option<AlignmentValue>,
}

impl EstimatorReport {
    pub fn new(mode: EstimatorMode, family: Family, elements: Vec<LocalIndicator>, zeta_local: Vec<f64>) -> Self {
        let theta = elements.iter().map(|l| l.theta * l.theta).sum::<f64>().sqrt();
        let zeta = zeta_local.iter().map(|z| z * z).sum::<f64>().sqrt();
        EstimatorReport {
            mode,
            family,
            theta,
            zeta,
            elements,
            zeta_local,
            alignment: None,
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.elements.iter().map(|l| l.theta).collect()
    }

    /// Sum of all squared breakdown terms; equals `theta^2`.
    pub fn breakdown_total(&self) -> f64 {
        self.elements
            .iter()
            .map(|l| l.volume + l.flux + l.conduit + l.nonconformity)
            .sum()
    }

    pub const CSV_HEADER: &'static str = "element,theta,zeta,volume,flux,conduit,nonconformity";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for (k, (l, z)) in self.elements.iter().zip(&self.zeta_local).enumerate() {
            let _ = writeln!(
                s,
                "{k},{},{},{},{},{},{}",
                l.theta, z, l.volume, l.flux, l.conduit, l.nonconformity
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_and_csv() {
        let r = EstimatorReport::new(
            EstimatorMode::AnisotropicConforming,
            Family::P1,
            vec![LocalIndicator::new(1.0, 2.0, 0.5, 0.0), LocalIndicator::new(0.25, 0.0, 0.0, 0.0)],
            vec![0.1, 0.2],
        );
        assert!((r.theta.powi(2) - r.breakdown_total()).abs() < 1e-15);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().starts_with("1,0.5,0.2,0.25,"));
        let back: EstimatorReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
