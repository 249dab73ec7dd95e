use cavityqed::io_formats::{
    emit_plot_script, parse_config, read_table_csv, read_table_json, write_table, Cell, Column, PlotKind, Provenance,
    ResultTable, TableFormat,
};
use cavityqed::presets::{preset_config, presets};
use cavityqed::run_scenario;

fn table_with(values: &[f64]) -> ResultTable {
    let cfg = preset_config("ray-vs-full").unwrap();
    let mut t = ResultTable::new(
        "axial-profile",
        vec![Column::float("kz", "1"), Column::float("gamma_ratio", "1"), Column::float("shift_ratio", "1"), Column::text("method")],
        Provenance::for_config(&cfg).unwrap(),
    );
    for (i, v) in values.iter().enumerate() {
        t.push_row(vec![Cell::Float(i as f64), Cell::Float(*v), Cell::Missing, Cell::Text("full, \"quoted\"".into())])
            .unwrap();
    }
    t
}

#[test]
fn every_preset_round_trips_bit_identically() {
    for p in presets() {
        let cfg = preset_config(p.name).unwrap();
        let again = parse_config(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash().unwrap(), again.hash().unwrap());
        assert_eq!(cfg.geometry.theta_m1.to_bits(), again.geometry.theta_m1.to_bits());
    }
}

#[test]
fn json_table_round_trip_is_exact() {
    let t = table_with(&[0.1 + 0.2, std::f64::consts::PI, 1e-300, -7.25e17, f64::MIN_POSITIVE]);
    let mut buf = Vec::new();
    write_table(&t, TableFormat::Json, &mut buf).unwrap();
    let back = read_table_json(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back, t);
    assert!(back.provenance.config.is_some());
}

#[test]
fn csv_values_parse_back_exactly() {
    let values = [0.1 + 0.2, 1.0 / 3.0, 29.288_123_456_789_01, 6.02e23];
    let t = table_with(&values);
    let mut buf = Vec::new();
    write_table(&t, TableFormat::Csv, &mut buf).unwrap();
    let (header, rows) = read_table_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(header, ["kz [1]", "gamma_ratio [1]", "shift_ratio [1]", "method"]);
    for (row, v) in rows.iter().zip(values) {
        assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), v.to_bits());
        assert_eq!(row[2], "");
        assert_eq!(row[3], "full, \"quoted\"");
    }
}

#[test]
fn empty_table_gives_header_only_csv() {
    let t = table_with(&[]);
    let mut buf = Vec::new();
    write_table(&t, TableFormat::Csv, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
}

#[test]
fn scenario_tables_match_their_plot_layouts() {
    let mut cfg = preset_config("detuning-sweep").unwrap();
    if let cavityqed::io_formats::ScanSpec::DetuningSweep { steps, .. } = &mut cfg.scan {
        *steps = 5;
    }
    let out = run_scenario(&cfg).unwrap();
    let t = &out.tables[0];
    let script = emit_plot_script(t, PlotKind::Detuning, "data.csv").unwrap();
    assert!(script.contains("multiplot layout 1,2"));
    assert!(script.contains("\"data.csv\""));
    assert!(!script.contains("0.06"));
    assert!(emit_plot_script(t, PlotKind::Compare, "data.csv").is_err());
    assert!("heatmap".parse::<PlotKind>().is_err());
}
