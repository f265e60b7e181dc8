//! File formats: instrument-log CSV parsers, result-artifact writers, and the
//! TOML run configuration.

pub mod config;
pub mod csv_data;

pub use config::{EnergySection, Paths, RunConfig, ThermalSection};
pub use csv_data::{
    parse_atmos_csv, parse_channel_map_csv, parse_iv_csv, parse_spectrum_csv, parse_weather_csv,
    write_atmos_csv, write_channel_map_csv, write_daily_yield_csv, write_histogram_csv,
    write_iv_csv, write_monthly_yield_csv, write_overlay_csv, write_report_json,
    write_spectrum_csv, write_weather_csv, AtmosRecord, FaultColumns,
};
