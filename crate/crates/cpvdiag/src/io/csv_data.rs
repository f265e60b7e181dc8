//! CSV readers and writers for the instrument-log formats and the result
//! artifacts. All inputs are comma-separated with a mandatory header; parse
//! errors carry the 1-based line number. Writers use fixed decimal widths so
//! identical runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Utc};

use crate::device::{iv_metrics, IVCurve};
use crate::diagnosis::{CurveFit, DiagnosisReport, HistogramBin};
use crate::energy::{ConditionRow, MonthlyYield, YieldRecord};
use crate::error::{Error, Result};
use crate::spectral::{AtmosphericState, Spectrum};

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn parse_f64(path: &Path, line_no: usize, field: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line_no, format!("{field}: bad number {value:?}")))
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(path, line_no, format!("{field}: non-finite value")))
            }
        })
}

fn parse_timestamp(path: &Path, line_no: usize, value: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(value)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::parse(path, line_no, format!("timestamp {value:?}: {e}")))
}

/// Non-empty, non-comment lines with their 1-based line numbers. `#` opens a
/// comment line.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn expect_header(path: &Path, text: &str, want: &[&str]) -> Result<usize> {
    let (line_no, line) = data_lines(text)
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let got = split_fields(line);
    if got != want {
        return Err(Error::parse(
            path,
            line_no,
            format!("header {:?}, expected {:?}", line, want.join(",")),
        ));
    }
    Ok(line_no)
}

// ---- spectrum ----

/// `wavelength_nm,irradiance_w_m2_nm` rows; wavelengths must be strictly
/// increasing and irradiance non-negative.
pub fn parse_spectrum_csv(text: &str, path: &Path) -> Result<Spectrum> {
    let header_line = expect_header(path, text, &["wavelength_nm", "irradiance_w_m2_nm"])?;
    let mut wl = Vec::new();
    let mut irr = Vec::new();
    for (line_no, line) in data_lines(text).skip_while(|(n, _)| *n <= header_line) {
        let f = split_fields(line);
        if f.len() != 2 {
            return Err(Error::parse(path, line_no, format!("expected 2 fields, got {}", f.len())));
        }
        let w = parse_f64(path, line_no, "wavelength_nm", f[0])?;
        let e = parse_f64(path, line_no, "irradiance_w_m2_nm", f[1])?;
        if let Some(prev) = wl.last() {
            if w <= *prev {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("wavelength {w} nm not above previous {prev} nm"),
                ));
            }
        }
        if e < 0.0 {
            return Err(Error::parse(path, line_no, format!("negative irradiance {e}")));
        }
        wl.push(w);
        irr.push(e);
    }
    Spectrum::new(wl, irr)
}

pub fn write_spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("wavelength_nm,irradiance_w_m2_nm\n");
    for (w, e) in spectrum.wavelengths_nm.iter().zip(&spectrum.irradiance_w_m2_nm) {
        let _ = writeln!(out, "{w:.1},{e:.6}");
    }
    out
}

// ---- weather log ----

/// `timestamp,dni_w_m2,t<CH>_c...[,power_w]`. Channel columns are named by
/// sensor id; at least one is required. The power column is optional and may
/// hold empty cells.
pub fn parse_weather_csv(text: &str, path: &Path) -> Result<Vec<ConditionRow>> {
    let (header_no, header) = data_lines(text)
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let cols = split_fields(header);
    if cols.len() < 3 || cols[0] != "timestamp" || cols[1] != "dni_w_m2" {
        return Err(Error::parse(
            path,
            header_no,
            "header must start with timestamp,dni_w_m2 and carry at least one t<CH>_c column",
        ));
    }
    let mut channels: Vec<(usize, u32)> = Vec::new();
    let mut power_col = None;
    for (idx, col) in cols.iter().enumerate().skip(2) {
        if *col == "power_w" {
            if idx != cols.len() - 1 {
                return Err(Error::parse(path, header_no, "power_w must be the last column"));
            }
            power_col = Some(idx);
        } else {
            let id = col
                .strip_prefix('t')
                .and_then(|s| s.strip_suffix("_c"))
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| {
                    Error::parse(path, header_no, format!("column {col:?} is not t<CH>_c or power_w"))
                })?;
            if channels.iter().any(|(_, c)| *c == id) {
                return Err(Error::parse(path, header_no, format!("duplicate channel column t{id}_c")));
            }
            channels.push((idx, id));
        }
    }
    if channels.is_empty() {
        return Err(Error::parse(path, header_no, "no t<CH>_c channel columns"));
    }

    let mut rows = Vec::new();
    for (line_no, line) in data_lines(text).skip_while(|(n, _)| *n <= header_no) {
        let f = split_fields(line);
        if f.len() != cols.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} fields, got {}", cols.len(), f.len()),
            ));
        }
        let timestamp = parse_timestamp(path, line_no, f[0])?;
        let dni_w_m2 = parse_f64(path, line_no, "dni_w_m2", f[1])?;
        let mut channel_temps_c = BTreeMap::new();
        for (idx, id) in &channels {
            channel_temps_c.insert(*id, parse_f64(path, line_no, cols[*idx], f[*idx])?);
        }
        let measured_power_w = match power_col {
            Some(idx) if !f[idx].is_empty() => Some(parse_f64(path, line_no, "power_w", f[idx])?),
            _ => None,
        };
        rows.push(ConditionRow {
            timestamp,
            dni_w_m2,
            channel_temps_c,
            measured_power_w,
        });
    }
    if rows.is_empty() {
        return Err(Error::Insufficient(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

pub fn write_weather_csv(rows: &[ConditionRow]) -> String {
    let mut channels: Vec<u32> = rows
        .first()
        .map(|r| r.channel_temps_c.keys().copied().collect())
        .unwrap_or_default();
    channels.sort_unstable();
    let mut out = String::from("timestamp,dni_w_m2");
    for ch in &channels {
        let _ = write!(out, ",t{ch}_c");
    }
    let has_power = rows.iter().any(|r| r.measured_power_w.is_some());
    if has_power {
        out.push_str(",power_w");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{:.1}", r.timestamp.format("%Y-%m-%dT%H:%M:%SZ"), r.dni_w_m2);
        for ch in &channels {
            let _ = write!(out, ",{:.2}", r.channel_temps_c.get(ch).copied().unwrap_or(f64::NAN));
        }
        if has_power {
            match r.measured_power_w {
                Some(p) => {
                    let _ = write!(out, ",{p:.1}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

// ---- IV curves ----

/// `voltage_v,current_a` rows, ascending voltage. Metrics are computed on
/// load, so a curve with no open-circuit crossing is rejected here.
pub fn parse_iv_csv(text: &str, path: &Path) -> Result<IVCurve> {
    let header_line = expect_header(path, text, &["voltage_v", "current_a"])?;
    let mut points = Vec::new();
    for (line_no, line) in data_lines(text).skip_while(|(n, _)| *n <= header_line) {
        let f = split_fields(line);
        if f.len() != 2 {
            return Err(Error::parse(path, line_no, format!("expected 2 fields, got {}", f.len())));
        }
        points.push((
            parse_f64(path, line_no, "voltage_v", f[0])?,
            parse_f64(path, line_no, "current_a", f[1])?,
        ));
    }
    let metrics = iv_metrics(&points)
        .map_err(|e| Error::Parse { path: path.display().to_string(), line: 0, msg: e.to_string() })?;
    Ok(IVCurve { points, metrics })
}

pub fn write_iv_csv(curve: &IVCurve) -> String {
    let mut out = String::from("voltage_v,current_a\n");
    for (v, i) in &curve.points {
        let _ = writeln!(out, "{v:.4},{i:.6}");
    }
    out
}

// ---- fitted-atmosphere table ----

/// One fitted-atmosphere row: the sun geometry it was fitted at, the
/// transmittance parameters, and the DNI closure check.
#[derive(Debug, Clone)]
pub struct AtmosRecord {
    pub timestamp: DateTime<Utc>,
    pub zenith_deg: f64,
    pub sun_earth_factor: f64,
    pub atm: AtmosphericState,
    pub measured_dni_w_m2: f64,
    pub modelled_dni_w_m2: f64,
}

const ATMOS_HEADER: [&str; 10] = [
    "timestamp",
    "zenith_deg",
    "sun_earth_factor",
    "aod500",
    "angstrom_alpha",
    "pw_cm",
    "ozone_atm_cm",
    "pressure_mb",
    "measured_dni_w_m2",
    "modelled_dni_w_m2",
];

pub fn parse_atmos_csv(text: &str, path: &Path) -> Result<Vec<AtmosRecord>> {
    let header_line = expect_header(path, text, &ATMOS_HEADER)?;
    let mut rows = Vec::new();
    for (line_no, line) in data_lines(text).skip_while(|(n, _)| *n <= header_line) {
        let f = split_fields(line);
        if f.len() != ATMOS_HEADER.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} fields, got {}", ATMOS_HEADER.len(), f.len()),
            ));
        }
        let atm = AtmosphericState {
            aod500: parse_f64(path, line_no, "aod500", f[3])?,
            angstrom_alpha: parse_f64(path, line_no, "angstrom_alpha", f[4])?,
            pw_cm: parse_f64(path, line_no, "pw_cm", f[5])?,
            ozone_atm_cm: parse_f64(path, line_no, "ozone_atm_cm", f[6])?,
            pressure_mb: parse_f64(path, line_no, "pressure_mb", f[7])?,
            ..AtmosphericState::default()
        };
        atm.validate()
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        rows.push(AtmosRecord {
            timestamp: parse_timestamp(path, line_no, f[0])?,
            zenith_deg: parse_f64(path, line_no, "zenith_deg", f[1])?,
            sun_earth_factor: parse_f64(path, line_no, "sun_earth_factor", f[2])?,
            atm,
            measured_dni_w_m2: parse_f64(path, line_no, "measured_dni_w_m2", f[8])?,
            modelled_dni_w_m2: parse_f64(path, line_no, "modelled_dni_w_m2", f[9])?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Insufficient(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

pub fn write_atmos_csv(rows: &[AtmosRecord]) -> String {
    let mut out = ATMOS_HEADER.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.3},{:.6},{:.6},{:.4},{:.6},{:.6},{:.2},{:.2},{:.2}",
            r.timestamp.format("%Y-%m-%dT%H:%M:%SZ"),
            r.zenith_deg,
            r.sun_earth_factor,
            r.atm.aod500,
            r.atm.angstrom_alpha,
            r.atm.pw_cm,
            r.atm.ozone_atm_cm,
            r.atm.pressure_mb,
            r.measured_dni_w_m2,
            r.modelled_dni_w_m2,
        );
    }
    out
}

// ---- sensor-channel map ----

/// `channel,cell_index` rows. A channel may cover several cells; a cell may
/// appear once.
pub fn parse_channel_map_csv(text: &str, path: &Path) -> Result<BTreeMap<u32, Vec<usize>>> {
    let header_line = expect_header(path, text, &["channel", "cell_index"])?;
    let mut map: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut seen = [false; crate::thermal::CELL_COUNT];
    for (line_no, line) in data_lines(text).skip_while(|(n, _)| *n <= header_line) {
        let f = split_fields(line);
        if f.len() != 2 {
            return Err(Error::parse(path, line_no, format!("expected 2 fields, got {}", f.len())));
        }
        let ch: u32 = f[0]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("channel: bad integer {:?}", f[0])))?;
        let cell: usize = f[1]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("cell_index: bad integer {:?}", f[1])))?;
        if cell >= seen.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("cell_index {cell} out of range 0-{}", seen.len() - 1),
            ));
        }
        if seen[cell] {
            return Err(Error::parse(path, line_no, format!("cell {cell} mapped twice")));
        }
        seen[cell] = true;
        map.entry(ch).or_default().push(cell);
    }
    if map.is_empty() {
        return Err(Error::Insufficient(format!("{}: no data rows", path.display())));
    }
    Ok(map)
}

pub fn write_channel_map_csv(map: &BTreeMap<u32, Vec<usize>>) -> String {
    let mut out = String::from("channel,cell_index\n");
    for (ch, cells) in map {
        for c in cells {
            let _ = writeln!(out, "{ch},{c}");
        }
    }
    out
}

// ---- yield artifacts ----

fn opt_energy(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Which modelled-yield columns a run asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultColumns {
    FaultOnly,
    HealthyOnly,
    Both,
}

pub fn write_daily_yield_csv(records: &[YieldRecord], cols: FaultColumns) -> String {
    let mut out = String::from("date,measured_dni_kwh_m2,modelled_dni_kwh_m2,measured_yield_kwh");
    match cols {
        FaultColumns::FaultOnly => out.push_str(",modelled_yield_fault_kwh"),
        FaultColumns::HealthyOnly => out.push_str(",modelled_yield_healthy_kwh"),
        FaultColumns::Both => out.push_str(
            ",modelled_yield_fault_kwh,modelled_yield_healthy_kwh,healthy_to_fault_ratio",
        ),
    }
    out.push_str(",partial,clear\n");
    for r in records {
        let _ = write!(
            out,
            "{},{:.6},{:.6},{}",
            r.date,
            r.measured_dni_kwh_m2,
            r.modelled_dni_kwh_m2,
            opt_energy(r.measured_yield_kwh)
        );
        match cols {
            FaultColumns::FaultOnly => {
                let _ = write!(out, ",{:.6}", r.modelled_yield_fault_kwh);
            }
            FaultColumns::HealthyOnly => {
                let _ = write!(out, ",{:.6}", r.modelled_yield_healthy_kwh);
            }
            FaultColumns::Both => {
                let ratio = r.modelled_yield_healthy_kwh / r.modelled_yield_fault_kwh;
                let _ = write!(
                    out,
                    ",{:.6},{:.6},{:.4}",
                    r.modelled_yield_fault_kwh, r.modelled_yield_healthy_kwh, ratio
                );
            }
        }
        let _ = writeln!(out, ",{},{}", r.partial, r.clear);
    }
    out
}

pub fn write_monthly_yield_csv(months: &[MonthlyYield], cols: FaultColumns) -> String {
    let mut out =
        String::from("year,month,clear_days,measured_dni_kwh_m2,modelled_dni_kwh_m2,measured_yield_kwh");
    match cols {
        FaultColumns::FaultOnly => out.push_str(",modelled_yield_fault_kwh"),
        FaultColumns::HealthyOnly => out.push_str(",modelled_yield_healthy_kwh"),
        FaultColumns::Both => out.push_str(
            ",modelled_yield_fault_kwh,modelled_yield_healthy_kwh,healthy_to_fault_ratio",
        ),
    }
    out.push('\n');
    for m in months {
        let _ = write!(
            out,
            "{},{},{},{:.6},{:.6},{}",
            m.year,
            m.month,
            m.clear_days,
            m.measured_dni_kwh_m2,
            m.modelled_dni_kwh_m2,
            opt_energy(m.measured_yield_kwh)
        );
        match cols {
            FaultColumns::FaultOnly => {
                let _ = write!(out, ",{:.6}", m.modelled_yield_fault_kwh);
            }
            FaultColumns::HealthyOnly => {
                let _ = write!(out, ",{:.6}", m.modelled_yield_healthy_kwh);
            }
            FaultColumns::Both => {
                let ratio = m.modelled_yield_healthy_kwh / m.modelled_yield_fault_kwh;
                let _ = write!(
                    out,
                    ",{:.6},{:.6},{:.4}",
                    m.modelled_yield_fault_kwh, m.modelled_yield_healthy_kwh, ratio
                );
            }
        }
        out.push('\n');
    }
    out
}

// ---- diagnosis artifacts ----

pub fn write_histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("lo_a,hi_a,count\n");
    for b in bins {
        let _ = writeln!(out, "{:.6},{:.6},{}", b.lo_a, b.hi_a, b.count);
    }
    out
}

/// Long-format overlay: one block per curve, labeled.
pub fn write_overlay_csv(curves: &[CurveFit]) -> String {
    let mut out = String::from("label,voltage_v,measured_a,fitted_a\n");
    for c in curves {
        for (v, m, f) in &c.overlay {
            let _ = writeln!(out, "{},{v:.4},{m:.6},{f:.6}", c.label);
        }
    }
    out
}

/// Pretty JSON plus trailing newline; field order is fixed by the structs.
pub fn write_report_json(report: &DiagnosisReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn p() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn spectrum_round_trip() {
        let sp = Spectrum::new(vec![300.0, 400.0, 500.0], vec![0.1, 1.2, 1.5]).unwrap();
        let text = write_spectrum_csv(&sp);
        let back = parse_spectrum_csv(&text, p()).unwrap();
        assert_eq!(back.wavelengths_nm, sp.wavelengths_nm);
        for (a, b) in back.irradiance_w_m2_nm.iter().zip(&sp.irradiance_w_m2_nm) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn spectrum_rejects_non_monotone_with_line() {
        let text = "wavelength_nm,irradiance_w_m2_nm\n300,1.0\n290,1.0\n";
        let err = parse_spectrum_csv(text, p()).unwrap_err();
        assert!(err.to_string().contains("test.csv:3"), "{err}");
    }

    #[test]
    fn weather_round_trip_with_gaps_in_power() {
        let t0 = Utc.with_ymd_and_hms(2014, 1, 7, 5, 30, 0).unwrap();
        let mk = |k: i64, pw: Option<f64>| {
            let mut temps = BTreeMap::new();
            temps.insert(1, 24.0 + k as f64);
            temps.insert(13, 25.5);
            ConditionRow {
                timestamp: t0 + chrono::Duration::minutes(10 * k),
                dni_w_m2: 500.0 + k as f64,
                channel_temps_c: temps,
                measured_power_w: pw,
            }
        };
        let rows = vec![mk(0, Some(110.5)), mk(1, None), mk(2, Some(130.0))];
        let text = write_weather_csv(&rows);
        let back = parse_weather_csv(&text, p()).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[0].channel_temps_c.len(), 2);
        assert_eq!(back[1].measured_power_w, None);
        assert_eq!(back[2].measured_power_w, Some(130.0));
        assert_eq!(back[2].timestamp, rows[2].timestamp);
    }

    #[test]
    fn weather_rejects_unknown_column() {
        let text = "timestamp,dni_w_m2,bogus\n2014-01-07T05:30:00Z,100,1\n";
        let err = parse_weather_csv(text, p()).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn weather_rejects_short_row() {
        let text = "timestamp,dni_w_m2,t1_c\n2014-01-07T05:30:00Z,100\n";
        let err = parse_weather_csv(text, p()).unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");
    }

    #[test]
    fn iv_round_trip_and_reject() {
        let points = vec![(-1.0, 10.0), (0.0, 10.0), (30.0, 9.0), (60.0, 3.0), (63.0, -1.0)];
        let metrics = iv_metrics(&points).unwrap();
        let curve = IVCurve { points, metrics };
        let text = write_iv_csv(&curve);
        let back = parse_iv_csv(&text, p()).unwrap();
        assert_eq!(back.points.len(), 5);
        assert!((back.metrics.voc_v - curve.metrics.voc_v).abs() < 1e-6);

        let bad = "voltage_v,current_a\n0,1\n1,2\n";
        assert!(parse_iv_csv(bad, p()).is_err());
    }

    #[test]
    fn atmos_round_trip() {
        let rec = AtmosRecord {
            timestamp: Utc.with_ymd_and_hms(2014, 1, 7, 5, 30, 0).unwrap(),
            zenith_deg: 41.0,
            sun_earth_factor: 1.0339,
            atm: AtmosphericState {
                aod500: 0.075,
                pw_cm: 2.01,
                ..AtmosphericState::default()
            },
            measured_dni_w_m2: 960.0,
            modelled_dni_w_m2: 964.0,
        };
        let text = write_atmos_csv(std::slice::from_ref(&rec));
        let back = parse_atmos_csv(&text, p()).unwrap();
        assert_eq!(back.len(), 1);
        assert!((back[0].atm.aod500 - 0.075).abs() < 1e-9);
        assert!((back[0].atm.pw_cm - 2.01).abs() < 1e-9);
        assert_eq!(back[0].timestamp, rec.timestamp);
    }

    #[test]
    fn channel_map_round_trip_and_double_claim() {
        let mut map = BTreeMap::new();
        map.insert(1, vec![0, 1]);
        map.insert(2, vec![2]);
        let text = write_channel_map_csv(&map);
        assert_eq!(parse_channel_map_csv(&text, p()).unwrap(), map);

        let dup = "channel,cell_index\n1,0\n2,0\n";
        let err = parse_channel_map_csv(dup, p()).unwrap_err();
        assert!(err.to_string().contains("mapped twice"), "{err}");
    }

    #[test]
    fn yield_csv_shapes() {
        let rec = YieldRecord {
            date: chrono::NaiveDate::from_ymd_opt(2014, 1, 7).unwrap(),
            measured_dni_kwh_m2: 6.1,
            modelled_dni_kwh_m2: 6.3,
            measured_yield_kwh: None,
            modelled_yield_fault_kwh: 1.03,
            modelled_yield_healthy_kwh: 1.53,
            partial: false,
            clear: true,
        };
        let both = write_daily_yield_csv(std::slice::from_ref(&rec), FaultColumns::Both);
        let mut lines = both.lines();
        assert!(lines.next().unwrap().ends_with("healthy_to_fault_ratio,partial,clear"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("2014-01-07,6.100000,6.300000,,1.030000,1.530000,1.4854"));
        let only = write_daily_yield_csv(std::slice::from_ref(&rec), FaultColumns::FaultOnly);
        assert!(!only.contains("healthy"));
    }
}
