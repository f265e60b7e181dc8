//! Junction-temperature handling: the empirical DNI-driven offset between
//! behind-cell sensors and the junction, and the sensor-channel to cell-index
//! mapping for the 25-cell layout.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const CELL_COUNT: usize = 25;

/// Offset model: junction = sensor + slope*DNI + intercept, valid above
/// min_dni. Coefficients are site-fitted; defaults ship with the toolkit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OffsetModel {
    pub slope_c_per_w_m2: f64,
    pub intercept_c: f64,
    pub min_dni_w_m2: f64,
}

impl Default for OffsetModel {
    fn default() -> Self {
        OffsetModel {
            slope_c_per_w_m2: 0.029,
            intercept_c: -17.0,
            min_dni_w_m2: 600.0,
        }
    }
}

impl OffsetModel {
    /// Cell-to-sensor temperature offset in Celsius. Errors below the
    /// validity floor; callers may elect zero offset there via
    /// [`offset_or_zero`].
    pub fn offset_c(&self, dni_w_m2: f64) -> Result<f64> {
        if dni_w_m2 < self.min_dni_w_m2 {
            return Err(Error::Domain(format!(
                "DNI {dni_w_m2} W/m2 below the offset-model validity floor {} W/m2",
                self.min_dni_w_m2
            )));
        }
        Ok(self.slope_c_per_w_m2 * dni_w_m2 + self.intercept_c)
    }

    /// Offset with the explicit below-validity policy: zero offset instead of
    /// an error when DNI is under the floor.
    pub fn offset_or_zero(&self, dni_w_m2: f64) -> f64 {
        self.offset_c(dni_w_m2).unwrap_or(0.0)
    }
}

/// Default-coefficient offset.
pub fn offset_temperature(dni_w_m2: f64) -> Result<f64> {
    OffsetModel::default().offset_c(dni_w_m2)
}

/// Behind-cell sensor readings plus the channel-to-cell assignment.
#[derive(Debug, Clone)]
pub struct TemperatureMap {
    /// Readings in Celsius keyed by channel id.
    pub channel_temps_c: BTreeMap<u32, f64>,
    /// Cell indices (0-24) represented by each channel.
    pub channel_to_cells: BTreeMap<u32, Vec<usize>>,
}

impl TemperatureMap {
    pub fn new(
        channel_temps_c: BTreeMap<u32, f64>,
        channel_to_cells: BTreeMap<u32, Vec<usize>>,
    ) -> Result<Self> {
        let map = TemperatureMap {
            channel_temps_c,
            channel_to_cells,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        let mut owner = [None::<u32>; CELL_COUNT];
        for (ch, cells) in &self.channel_to_cells {
            if !self.channel_temps_c.contains_key(ch) {
                return Err(Error::Config(format!("channel {ch} mapped but has no reading")));
            }
            for &c in cells {
                if c >= CELL_COUNT {
                    return Err(Error::Config(format!("cell index {c} out of range 0-24")));
                }
                if let Some(prev) = owner[c] {
                    return Err(Error::Config(format!(
                        "cell {c} mapped by both channel {prev} and channel {ch}"
                    )));
                }
                owner[c] = Some(*ch);
            }
        }
        if let Some(unmapped) = owner.iter().position(|o| o.is_none()) {
            return Err(Error::Config(format!("cell {unmapped} not covered by any channel")));
        }
        for (ch, t) in &self.channel_temps_c {
            if !(-20.0..=120.0).contains(t) {
                return Err(Error::Domain(format!(
                    "channel {ch} reading {t} C outside -20..120 C"
                )));
            }
        }
        Ok(())
    }

    /// Mean of all channel readings (single-temperature simulation mode).
    pub fn channel_average_c(&self) -> f64 {
        let n = self.channel_temps_c.len() as f64;
        self.channel_temps_c.values().sum::<f64>() / n
    }
}

/// Per-cell junction temperatures: mapped sensor reading + DNI offset.
/// `zero_offset_below` selects the explicit below-validity policy instead of
/// erroring when DNI is under the model floor.
pub fn effective_cell_temps(
    map: &TemperatureMap,
    dni_w_m2: f64,
    offset: &OffsetModel,
    zero_offset_below: bool,
) -> Result<[f64; CELL_COUNT]> {
    map.validate()?;
    let off = if zero_offset_below {
        offset.offset_or_zero(dni_w_m2)
    } else {
        offset.offset_c(dni_w_m2)?
    };
    let mut out = [0.0; CELL_COUNT];
    for (ch, cells) in &map.channel_to_cells {
        let t = map.channel_temps_c[ch] + off;
        for &c in cells {
            out[c] = t;
        }
    }
    Ok(out)
}

/// All-channel average + offset, for single-temperature simulation.
pub fn effective_average_temp(
    map: &TemperatureMap,
    dni_w_m2: f64,
    offset: &OffsetModel,
    zero_offset_below: bool,
) -> Result<f64> {
    map.validate()?;
    let off = if zero_offset_below {
        offset.offset_or_zero(dni_w_m2)
    } else {
        offset.offset_c(dni_w_m2)?
    };
    Ok(map.channel_average_c() + off)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_map(temps: &[f64]) -> TemperatureMap {
        // channels 1..=12 each cover two cells, channel 13 covers cell 24
        let mut channel_temps = BTreeMap::new();
        let mut channel_cells = BTreeMap::new();
        for (i, &t) in temps.iter().enumerate() {
            let ch = i as u32 + 1;
            channel_temps.insert(ch, t);
            let cells = if ch == 13 {
                vec![24]
            } else {
                vec![2 * i, 2 * i + 1]
            };
            channel_cells.insert(ch, cells);
        }
        TemperatureMap::new(channel_temps, channel_cells).unwrap()
    }

    #[test]
    fn offset_reference_points_exact() {
        assert!((offset_temperature(600.0).unwrap() - 0.40).abs() < 1e-12);
        assert!((offset_temperature(1000.0).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn offset_below_floor_policy() {
        assert!(offset_temperature(586.2).is_err());
        let m = OffsetModel::default();
        assert_eq!(m.offset_or_zero(586.2), 0.0);
        assert_eq!(m.offset_or_zero(500.0), 0.0);
    }

    #[test]
    fn offset_is_affine() {
        let m = OffsetModel::default();
        for &(a, b) in &[(600.0, 1000.0), (700.0, 950.0), (601.0, 1200.0)] {
            let lhs = m.offset_c(a).unwrap() - m.offset_c(b).unwrap();
            assert!((lhs - 0.029 * (a - b)).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_channels_uniform_cells() {
        let map = simple_map(&[70.0; 13]);
        let t = effective_cell_temps(&map, 1000.0, &OffsetModel::default(), false).unwrap();
        for &c in t.iter() {
            assert!((c - 82.0).abs() < 1e-12);
        }
        let avg = effective_average_temp(&map, 1000.0, &OffsetModel::default(), false).unwrap();
        assert!((avg - 82.0).abs() < 1e-12);
    }

    #[test]
    fn order_preserving_mapping() {
        let temps: Vec<f64> = (0..13).map(|k| 65.0 + k as f64).collect();
        let map = simple_map(&temps);
        let t = effective_cell_temps(&map, 960.0, &OffsetModel::default(), false).unwrap();
        // hotter channel -> hotter mapped cells
        assert!(t[0] < t[2]);
        assert!(t[22] < t[24]);
    }

    #[test]
    fn zero_offset_passthrough() {
        let map = simple_map(&[70.0; 13]);
        let t = effective_cell_temps(&map, 500.0, &OffsetModel::default(), true).unwrap();
        assert!(t.iter().all(|&c| (c - 70.0).abs() < 1e-12));
        assert!(effective_cell_temps(&map, 500.0, &OffsetModel::default(), false).is_err());
    }

    #[test]
    fn coverage_validation() {
        let mut channel_temps = BTreeMap::new();
        channel_temps.insert(1, 70.0);
        let mut channel_cells = BTreeMap::new();
        channel_cells.insert(1, (0..24).collect::<Vec<_>>()); // cell 24 missing
        assert!(TemperatureMap::new(channel_temps.clone(), channel_cells).is_err());

        let mut dup = BTreeMap::new();
        dup.insert(1, (0..25).collect::<Vec<_>>());
        let mut dup2 = dup.clone();
        dup2.insert(2, vec![3]); // double-mapped cell 3
        channel_temps.insert(2, 71.0);
        assert!(TemperatureMap::new(channel_temps, dup2).is_err());
    }
}
