use std::fs;
use std::path::Path;

use equiclass::cli::{ingest_csv, run, RunConfig};
use equiclass::plot::scatter_svg;
use equiclass::{partition_is_valid, CharacteristicTable, Classification, Error};
use tempfile::TempDir;

fn config() -> RunConfig {
    RunConfig::new(2, vec!["semidev".into()], vec!["avgret".into()])
}

fn write(dir: &TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

const SIX: &str = "id,semidev,avgret\n\
a,1.0,1.0\n\
b,1.5,1.4\n\
c,2.0,1.7\n\
d,1.2,0.5\n\
e,2.2,0.8\n\
f,3.0,1.0\n";

#[test]
fn ingests_selected_columns() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "d.csv", "name,avgret,semidev,extra\nx,0.2,0.1,9\ny,0.3,0.2,9\n");
    let t = ingest_csv(&p, &config()).unwrap();
    assert_eq!(t.num_objects(), 2);
    assert_eq!(t.object_ids(), ["x", "y"]);
    assert_eq!(t.inputs()[(0, 1)], 0.2);
    assert_eq!(t.outputs()[(0, 0)], 0.2);
}

#[test]
fn missing_column_is_reported() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "d.csv", "id,semidev\nx,0.1\n");
    assert_eq!(
        ingest_csv(&p, &config()).unwrap_err(),
        Error::MissingColumn("avgret".into())
    );
}

#[test]
fn bad_number_names_row_and_column() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "d.csv", "id,semidev,avgret\nx,0.1,0.2\ny,abc,0.3\n");
    match ingest_csv(&p, &config()).unwrap_err() {
        Error::Parse { row, column, .. } => {
            assert_eq!(row, 2);
            assert_eq!(column, "semidev");
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn empty_data_section_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "d.csv", "id,semidev,avgret\n");
    assert!(matches!(ingest_csv(&p, &config()), Err(Error::Parse { .. })));
}

#[test]
fn nonpositive_input_is_rejected() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "d.csv", "id,semidev,avgret\nx,0.1,0.2\ny,0,0.3\n");
    assert!(matches!(
        ingest_csv(&p, &config()),
        Err(Error::NonPositiveInput { object: 1, .. })
    ));
}

fn shape_count(svg: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).expect("well-formed svg");
    doc.descendants()
        .filter(|n| matches!(n.tag_name().name(), "rect" | "circle" | "polygon"))
        .count()
}

#[test]
fn svg_has_one_glyph_per_object() {
    let table = CharacteristicTable::single(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], &[1.0; 7]).unwrap();
    for s in 1..=5 {
        let cats: Vec<Vec<usize>> = (0..s).map(|c| (0..7).filter(|t| t % s == c).collect()).collect();
        let svg = scatter_svg(&table, &Classification::new(cats), "a < b & c", "x", "y");
        assert_eq!(shape_count(&svg), 7);
    }
}

#[test]
fn run_writes_consistent_outputs() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", SIX);
    let out = dir.path().join("out");
    let mut cfg = config();
    cfg.emit_plots = true;
    let report = run(&cfg, &data, &out).unwrap();

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert!(json["config"].get("workers").is_none());
    assert!(json["runtime"]["workers"].is_number());
    assert_eq!(json["history"].as_array().unwrap().len(), report.history.len());

    for step in &report.history {
        assert!(partition_is_valid(&step.classification(), 6, 2));
        let svg = fs::read_to_string(out.join("plots").join(format!("step_{}.svg", step.step))).unwrap();
        assert_eq!(shape_count(&svg), 6);
    }
    assert!(report.history.windows(2).all(|w| w[1].total < w[0].total));

    let mut rdr = csv::Reader::from_path(out.join("classification.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["object_id", "category"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    let final_assign = report.final_step().classification().assignment(6);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[1].parse::<usize>().unwrap(), final_assign[k].unwrap() + 1);
    }
}

#[test]
fn identifiers_with_commas_are_quoted() {
    let dir = TempDir::new().unwrap();
    let body = SIX.replacen("a,1.0", "\"Acme, Inc.\",1.0", 1);
    let data = write(&dir, "d.csv", &body);
    let out = dir.path().join("out");
    run(&config(), &data, &out).unwrap();
    let text = fs::read_to_string(out.join("classification.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("\"Acme, Inc.\","));
    assert!(!Path::new(&out.join("plots")).exists());
}
