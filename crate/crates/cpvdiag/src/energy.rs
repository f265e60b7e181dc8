//! Daily energy yield: drives the module model over a timestamped weather
//! series (DNI + behind-cell sensor readings), integrates maximum power into
//! kWh, and reports paired fault-on/fault-off yields per day.
//!
//! Per timestep the pipeline is: clear-sky beam spectrum for the sun position,
//! linear rescale to the measured DNI, photocurrents, sensor-to-junction
//! temperature offset, maximum-power solve. Days are integrated by the
//! trapezoid rule on the raw timestamps; gaps are never bridged, a day with a
//! gap over the configured limit is flagged partial instead.

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::device::{module_mpp, module_photocurrents, ModuleModel};
use crate::error::{Error, Result};
use crate::numeric::trapezoid;
use crate::spectral::{
    direct_beam_spectrum, scale_for_clouds, sun, AtmosphericState, SolarGeometry,
};
use crate::thermal::{effective_cell_temps, OffsetModel, TemperatureMap};

/// Measurement site. Longitude is degrees east; the timezone offset only
/// affects how timestamps group into local calendar days.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Site {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub elevation_m: f64,
    pub tz_offset_hours: f64,
}

impl Default for Site {
    fn default() -> Self {
        // Bangalore rooftop array.
        Site {
            latitude_deg: 13.0,
            longitude_deg: 77.6,
            elevation_m: 920.0,
            tz_offset_hours: 5.5,
        }
    }
}

impl Site {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::Domain(format!(
                "latitude {} outside -90..90",
                self.latitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::Domain(format!(
                "longitude {} outside -180..180",
                self.longitude_deg
            )));
        }
        if !(-14.0..=14.0).contains(&self.tz_offset_hours) {
            return Err(Error::Domain(format!(
                "timezone offset {} h outside -14..14",
                self.tz_offset_hours
            )));
        }
        Ok(())
    }

    /// Local calendar date a UTC instant falls on.
    pub fn local_date(&self, ts: DateTime<Utc>) -> NaiveDate {
        (ts + chrono::Duration::seconds((self.tz_offset_hours * 3600.0).round() as i64))
            .date_naive()
    }
}

/// One logger row: the pyrheliometer reading plus the behind-cell sensor
/// channels, and optionally the measured module power for yield comparison.
#[derive(Debug, Clone)]
pub struct ConditionRow {
    pub timestamp: DateTime<Utc>,
    pub dni_w_m2: f64,
    pub channel_temps_c: BTreeMap<u32, f64>,
    pub measured_power_w: Option<f64>,
}

/// Shared context for a yield run: the atmosphere used for spectral shape,
/// the site for sun position, and the sensor-channel wiring.
#[derive(Debug, Clone)]
pub struct EnergyContext {
    pub atm: AtmosphericState,
    pub site: Site,
    pub channel_to_cells: BTreeMap<u32, Vec<usize>>,
    pub offset: OffsetModel,
    /// Below the offset model's validity floor the offset is taken as zero
    /// instead of erroring; mornings and evenings always pass through here.
    pub zero_offset_below: bool,
    /// Longest tolerated spacing between rows before the day is flagged
    /// partial, minutes.
    pub max_gap_min: f64,
    /// Peak-DNI threshold for the clear-day selection heuristic, W/m2.
    pub clear_day_peak_w_m2: f64,
}

impl EnergyContext {
    pub fn new(
        atm: AtmosphericState,
        site: Site,
        channel_to_cells: BTreeMap<u32, Vec<usize>>,
    ) -> Self {
        EnergyContext {
            atm,
            site,
            channel_to_cells,
            offset: OffsetModel::default(),
            zero_offset_below: true,
            max_gap_min: 10.0,
            clear_day_peak_w_m2: 700.0,
        }
    }
}

/// Sun geometry at an instant, or None while the sun is below the horizon.
pub fn solar_geometry(ts: DateTime<Utc>, site: &Site) -> Option<SolarGeometry> {
    let z = sun::zenith_deg(ts, site.latitude_deg, site.longitude_deg);
    if z >= 90.0 {
        return None;
    }
    Some(SolarGeometry {
        zenith_deg: z,
        airmass: sun::kasten_airmass(z),
        sun_earth_factor: sun::sun_earth_factor(ts.ordinal()),
    })
}

/// Maximum power of the module under one set of conditions, W.
///
/// The clear-sky spectrum for `geom` is rescaled to the measured DNI so the
/// spectral shape survives cloud attenuation. Sensor readings become junction
/// temperatures through the DNI offset. `fault_on` toggles the module's fault
/// block; everything else is shared between the paired runs.
#[allow(clippy::too_many_arguments)]
pub fn simulate_timestep(
    module: &ModuleModel,
    atm: &AtmosphericState,
    geom: &SolarGeometry,
    dni_w_m2: f64,
    temps: &TemperatureMap,
    offset: &OffsetModel,
    zero_offset_below: bool,
    fault_on: bool,
) -> Result<f64> {
    if dni_w_m2 <= 0.0 {
        return Ok(0.0);
    }
    let clear = direct_beam_spectrum(atm, geom)?;
    let spectrum = scale_for_clouds(&clear, dni_w_m2)?;
    let m = module.fault_enabled(fault_on);
    let ils = module_photocurrents(&m, &spectrum)?;
    let cell_temps = effective_cell_temps(temps, dni_w_m2, offset, zero_offset_below)?;
    let (i_mp, v_mp) = module_mpp(&m, &ils, &cell_temps)?;
    Ok((i_mp * v_mp).max(0.0))
}

/// Trapezoid integral of a power series over its timestamps, kWh.
pub fn integrate_energy_kwh(timestamps: &[DateTime<Utc>], power_w: &[f64]) -> f64 {
    debug_assert_eq!(timestamps.len(), power_w.len());
    if timestamps.len() < 2 {
        return 0.0;
    }
    let t0 = timestamps[0];
    let hours: Vec<f64> = timestamps
        .iter()
        .map(|t| (*t - t0).num_milliseconds() as f64 / 3.6e6)
        .collect();
    trapezoid(&hours, power_w) / 1000.0
}

/// One day's simulation: integrated energy plus the per-row power trace.
#[derive(Debug, Clone)]
pub struct DaySimulation {
    pub energy_kwh: f64,
    /// A gap above the configured limit was found; the integral spans it
    /// without interpolation.
    pub partial: bool,
    pub power_w: Vec<f64>,
}

fn check_ordering(rows: &[ConditionRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Insufficient("empty condition series".into()));
    }
    for w in rows.windows(2) {
        if w[1].timestamp <= w[0].timestamp {
            return Err(Error::Domain(format!(
                "condition series not time-ordered at {}",
                w[1].timestamp
            )));
        }
    }
    Ok(())
}

fn has_gap(rows: &[ConditionRow], max_gap_min: f64) -> bool {
    rows.windows(2).any(|w| {
        (w[1].timestamp - w[0].timestamp).num_milliseconds() as f64 / 60_000.0 > max_gap_min
    })
}

/// Integrates `simulate_timestep` over one day's rows.
///
/// Rows must be strictly time-ordered. Rows with no beam (zero DNI or sun
/// below the horizon) contribute zero power. Inner errors carry the
/// offending row's timestamp.
pub fn simulate_day(
    module: &ModuleModel,
    ctx: &EnergyContext,
    rows: &[ConditionRow],
    fault_on: bool,
) -> Result<DaySimulation> {
    check_ordering(rows)?;
    ctx.site.validate()?;
    let mut power = Vec::with_capacity(rows.len());
    for row in rows {
        let p = match solar_geometry(row.timestamp, &ctx.site) {
            None => 0.0,
            Some(geom) => {
                let temps =
                    TemperatureMap::new(row.channel_temps_c.clone(), ctx.channel_to_cells.clone())?;
                simulate_timestep(
                    module,
                    &ctx.atm,
                    &geom,
                    row.dni_w_m2,
                    &temps,
                    &ctx.offset,
                    ctx.zero_offset_below,
                    fault_on,
                )
                .map_err(|e| Error::Domain(format!("at {}: {e}", row.timestamp)))?
            }
        };
        power.push(p);
    }
    let timestamps: Vec<DateTime<Utc>> = rows.iter().map(|r| r.timestamp).collect();
    Ok(DaySimulation {
        energy_kwh: integrate_energy_kwh(&timestamps, &power),
        partial: has_gap(rows, ctx.max_gap_min),
        power_w: power,
    })
}

/// Clear-day heuristic: the day's peak DNI reaches the threshold.
pub fn is_clear_day(rows: &[ConditionRow], peak_threshold_w_m2: f64) -> bool {
    rows.iter().any(|r| r.dni_w_m2 >= peak_threshold_w_m2)
}

/// Daily yield row: measured and modelled DNI integrals alongside measured
/// and paired modelled energies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YieldRecord {
    pub date: NaiveDate,
    pub measured_dni_kwh_m2: f64,
    pub modelled_dni_kwh_m2: f64,
    pub measured_yield_kwh: Option<f64>,
    pub modelled_yield_fault_kwh: f64,
    pub modelled_yield_healthy_kwh: f64,
    /// Day had a logging gap; excluded from monthly averages.
    pub partial: bool,
    /// Passed the clear-day selection heuristic.
    pub clear: bool,
}

impl YieldRecord {
    pub fn validate(&self) -> Result<()> {
        let energies = [
            self.measured_dni_kwh_m2,
            self.modelled_dni_kwh_m2,
            self.measured_yield_kwh.unwrap_or(0.0),
            self.modelled_yield_fault_kwh,
            self.modelled_yield_healthy_kwh,
        ];
        if energies.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::Domain(format!(
                "yield record {} has a negative or non-finite energy",
                self.date
            )));
        }
        if self.modelled_yield_healthy_kwh < self.modelled_yield_fault_kwh {
            return Err(Error::Domain(format!(
                "yield record {}: healthy yield below faulty yield",
                self.date
            )));
        }
        Ok(())
    }
}

/// Full daily record: DNI integrals, measured energy when the log carries
/// power, and the fault-on/fault-off pair.
pub fn day_record(
    module: &ModuleModel,
    ctx: &EnergyContext,
    rows: &[ConditionRow],
) -> Result<YieldRecord> {
    check_ordering(rows)?;
    let timestamps: Vec<DateTime<Utc>> = rows.iter().map(|r| r.timestamp).collect();
    let dni: Vec<f64> = rows.iter().map(|r| r.dni_w_m2.max(0.0)).collect();

    // Clear-sky model DNI wherever the sun is up, for the modelled column.
    let mut model_dni = Vec::with_capacity(rows.len());
    for row in rows {
        let d = match solar_geometry(row.timestamp, &ctx.site) {
            None => 0.0,
            Some(geom) => direct_beam_spectrum(&ctx.atm, &geom)?.dni_w_m2(),
        };
        model_dni.push(d);
    }

    let measured_yield_kwh = if rows.iter().all(|r| r.measured_power_w.is_some()) {
        let p: Vec<f64> = rows
            .iter()
            .map(|r| r.measured_power_w.unwrap_or(0.0).max(0.0))
            .collect();
        Some(integrate_energy_kwh(&timestamps, &p))
    } else {
        None
    };

    let faulty = simulate_day(module, ctx, rows, true)?;
    let healthy = simulate_day(module, ctx, rows, false)?;

    let record = YieldRecord {
        date: ctx.site.local_date(rows[0].timestamp),
        measured_dni_kwh_m2: integrate_energy_kwh(&timestamps, &dni),
        modelled_dni_kwh_m2: integrate_energy_kwh(&timestamps, &model_dni),
        measured_yield_kwh,
        modelled_yield_fault_kwh: faulty.energy_kwh,
        modelled_yield_healthy_kwh: healthy.energy_kwh,
        partial: faulty.partial,
        clear: is_clear_day(rows, ctx.clear_day_peak_w_m2),
    };
    record.validate()?;
    Ok(record)
}

/// Splits a time-ordered series into per-local-date groups.
pub fn group_by_local_date(
    rows: &[ConditionRow],
    site: &Site,
) -> BTreeMap<NaiveDate, Vec<ConditionRow>> {
    let mut out: BTreeMap<NaiveDate, Vec<ConditionRow>> = BTreeMap::new();
    for row in rows {
        out.entry(site.local_date(row.timestamp))
            .or_default()
            .push(row.clone());
    }
    out
}

/// Monthly average over complete clear days, mirroring the daily columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonthlyYield {
    pub year: i32,
    pub month: u32,
    pub clear_days: usize,
    pub measured_dni_kwh_m2: f64,
    pub modelled_dni_kwh_m2: f64,
    pub measured_yield_kwh: Option<f64>,
    pub modelled_yield_fault_kwh: f64,
    pub modelled_yield_healthy_kwh: f64,
}

/// Averages daily records by calendar month, keeping only complete clear
/// days. Months with no qualifying day are omitted.
pub fn monthly_yields(daily: &[YieldRecord]) -> Vec<MonthlyYield> {
    let mut groups: BTreeMap<(i32, u32), Vec<&YieldRecord>> = BTreeMap::new();
    for r in daily {
        if r.clear && !r.partial {
            groups.entry((r.date.year(), r.date.month())).or_default().push(r);
        }
    }
    groups
        .into_iter()
        .map(|((year, month), rs)| {
            let n = rs.len() as f64;
            let mean = |f: &dyn Fn(&YieldRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            let measured_yield_kwh = if rs.iter().all(|r| r.measured_yield_kwh.is_some()) {
                Some(mean(&|r| r.measured_yield_kwh.unwrap_or(0.0)))
            } else {
                None
            };
            MonthlyYield {
                year,
                month,
                clear_days: rs.len(),
                measured_dni_kwh_m2: mean(&|r| r.measured_dni_kwh_m2),
                modelled_dni_kwh_m2: mean(&|r| r.modelled_dni_kwh_m2),
                measured_yield_kwh,
                modelled_yield_fault_kwh: mean(&|r| r.modelled_yield_fault_kwh),
                modelled_yield_healthy_kwh: mean(&|r| r.modelled_yield_healthy_kwh),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{calibrate_reference, default_module, CalibrationTargets};
    use chrono::TimeZone;
    use std::sync::LazyLock;

    static CAL: LazyLock<ModuleModel> = LazyLock::new(|| {
        calibrate_reference(&default_module(), &CalibrationTargets::default())
            .expect("calibration")
            .0
    });

    fn chan_map() -> BTreeMap<u32, Vec<usize>> {
        let mut m = BTreeMap::new();
        for ch in 1u32..=12 {
            let i = (ch - 1) as usize;
            m.insert(ch, vec![2 * i, 2 * i + 1]);
        }
        m.insert(13, vec![24]);
        m
    }

    fn ctx() -> EnergyContext {
        let atm = AtmosphericState {
            aod500: 0.075,
            pw_cm: 2.01,
            ..AtmosphericState::default()
        };
        EnergyContext::new(atm, Site::default(), chan_map())
    }

    fn row(ts: DateTime<Utc>, dni: f64) -> ConditionRow {
        let mut temps = BTreeMap::new();
        for ch in 1u32..=13 {
            temps.insert(ch, 25.0 + 0.02 * dni);
        }
        ConditionRow {
            timestamp: ts,
            dni_w_m2: dni,
            channel_temps_c: temps,
            measured_power_w: None,
        }
    }

    fn midday(minute_offsets: &[i64], dnis: &[f64]) -> Vec<ConditionRow> {
        // around local noon in Bangalore: 06:30 UTC
        let base = Utc.with_ymd_and_hms(2014, 1, 7, 6, 30, 0).unwrap();
        minute_offsets
            .iter()
            .zip(dnis)
            .map(|(m, d)| row(base + chrono::Duration::minutes(*m), *d))
            .collect()
    }

    #[test]
    fn constant_power_rectangle() {
        let base = Utc.with_ymd_and_hms(2014, 1, 7, 6, 0, 0).unwrap();
        let ts: Vec<_> = (0..=6)
            .map(|k| base + chrono::Duration::minutes(10 * k))
            .collect();
        let p = vec![1000.0; ts.len()];
        assert!((integrate_energy_kwh(&ts, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_dni_is_zero_power() {
        let geom = solar_geometry(
            Utc.with_ymd_and_hms(2014, 1, 7, 6, 30, 0).unwrap(),
            &Site::default(),
        )
        .unwrap();
        let r = row(Utc.with_ymd_and_hms(2014, 1, 7, 6, 30, 0).unwrap(), 0.0);
        let temps = TemperatureMap::new(r.channel_temps_c, chan_map()).unwrap();
        let p = simulate_timestep(
            &CAL,
            &ctx().atm,
            &geom,
            0.0,
            &temps,
            &OffsetModel::default(),
            true,
            true,
        )
        .unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn fault_is_strictly_lossy() {
        let c = ctx();
        let rows = midday(&[0], &[900.0]);
        let geom = solar_geometry(rows[0].timestamp, &c.site).unwrap();
        let temps =
            TemperatureMap::new(rows[0].channel_temps_c.clone(), c.channel_to_cells.clone())
                .unwrap();
        let m = CAL.with_fault(0.23, 0.0664, CAL.mismatch_seed).unwrap();
        let p_f = simulate_timestep(&m, &c.atm, &geom, 900.0, &temps, &c.offset, true, true)
            .unwrap();
        let p_h = simulate_timestep(&m, &c.atm, &geom, 900.0, &temps, &c.offset, true, false)
            .unwrap();
        assert!(p_h > p_f, "healthy {p_h} W must exceed faulty {p_f} W");
    }

    #[test]
    fn unordered_series_rejected() {
        let mut rows = midday(&[0, 10, 20], &[800.0, 820.0, 810.0]);
        rows.swap(0, 2);
        let err = simulate_day(&CAL, &ctx(), &rows, true).unwrap_err();
        assert!(err.to_string().contains("time-ordered"), "{err}");
    }

    #[test]
    fn split_day_energy_is_additive() {
        let m = CAL.with_fault(0.23, 0.0664, CAL.mismatch_seed).unwrap();
        let c = ctx();
        let rows = midday(&[0, 10, 20, 30, 40], &[700.0, 800.0, 880.0, 860.0, 790.0]);
        let whole = simulate_day(&m, &c, &rows, true).unwrap().energy_kwh;
        let first = simulate_day(&m, &c, &rows[..3], true).unwrap().energy_kwh;
        let second = simulate_day(&m, &c, &rows[2..], true).unwrap().energy_kwh;
        assert!(
            (whole - (first + second)).abs() < 1e-9,
            "whole {whole} vs halves {}",
            first + second
        );
    }

    #[test]
    fn gap_flags_partial_day() {
        let c = ctx();
        let rows = midday(&[0, 10, 35], &[800.0, 820.0, 780.0]);
        let sim = simulate_day(&CAL, &c, &rows, false).unwrap();
        assert!(sim.partial);
        let tight = midday(&[0, 10, 20], &[800.0, 820.0, 780.0]);
        assert!(!simulate_day(&CAL, &c, &tight, false).unwrap().partial);
    }

    #[test]
    fn day_record_orders_healthy_above_faulty() {
        let m = CAL.with_fault(0.23, 0.0664, CAL.mismatch_seed).unwrap();
        let c = ctx();
        let rows = midday(&[0, 10, 20, 30], &[650.0, 790.0, 900.0, 840.0]);
        let rec = day_record(&m, &c, &rows).unwrap();
        assert!(rec.modelled_yield_healthy_kwh > rec.modelled_yield_fault_kwh);
        assert!(rec.clear);
        assert!(!rec.partial);
        assert!(rec.measured_yield_kwh.is_none());
        assert!(rec.measured_dni_kwh_m2 > 0.0);
        assert!(rec.modelled_dni_kwh_m2 > 0.0);
    }

    #[test]
    fn yield_scales_sublinearly_with_dni() {
        // photocurrent is linear in DNI but junction heating climbs with it,
        // so a uniform 1.25x DNI day must return less than 1.25x the energy
        let c = ctx();
        let base = midday(&[0, 10, 20, 30], &[640.0, 700.0, 760.0, 720.0]);
        let scaled: Vec<ConditionRow> = base
            .iter()
            .map(|r| {
                let mut s = r.clone();
                s.dni_w_m2 *= 1.25;
                s
            })
            .collect();
        let e0 = simulate_day(&CAL, &c, &base, false).unwrap().energy_kwh;
        let e1 = simulate_day(&CAL, &c, &scaled, false).unwrap().energy_kwh;
        assert!(e1 > e0, "more light, more energy");
        assert!(
            e1 < 1.25 * e0,
            "scaled day {e1} kWh should stay under 1.25x base {}",
            1.25 * e0
        );
    }

    #[test]
    fn monthly_average_skips_partial_and_cloudy_days() {
        let mk = |d: u32, clear: bool, partial: bool, f: f64| YieldRecord {
            date: NaiveDate::from_ymd_opt(2014, 1, d).unwrap(),
            measured_dni_kwh_m2: 6.0,
            modelled_dni_kwh_m2: 6.2,
            measured_yield_kwh: Some(f),
            modelled_yield_fault_kwh: f,
            modelled_yield_healthy_kwh: f * 1.5,
            partial,
            clear,
        };
        let daily = vec![
            mk(7, true, false, 1.0),
            mk(8, true, false, 1.2),
            mk(9, false, false, 0.4),
            mk(10, true, true, 1.1),
        ];
        let months = monthly_yields(&daily);
        assert_eq!(months.len(), 1);
        assert_eq!(months[0].clear_days, 2);
        assert!((months[0].modelled_yield_fault_kwh - 1.1).abs() < 1e-12);
        assert!((months[0].measured_yield_kwh.unwrap() - 1.1).abs() < 1e-12);
    }

    #[test]
    fn group_by_local_date_splits_on_midnight_local() {
        let site = Site::default();
        // 18:40 UTC on the 7th is 00:10 local on the 8th at UTC+5.5
        let rows = vec![
            row(Utc.with_ymd_and_hms(2014, 1, 7, 12, 0, 0).unwrap(), 100.0),
            row(Utc.with_ymd_and_hms(2014, 1, 7, 18, 40, 0).unwrap(), 0.0),
        ];
        let groups = group_by_local_date(&rows, &site);
        assert_eq!(groups.len(), 2);
        assert!(groups.contains_key(&NaiveDate::from_ymd_opt(2014, 1, 7).unwrap()));
        assert!(groups.contains_key(&NaiveDate::from_ymd_opt(2014, 1, 8).unwrap()));
    }
}
