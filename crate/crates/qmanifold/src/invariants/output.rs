use super::{DTable, XTable};

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is utf-8")
}

/// One row per `(d', n')`.
pub fn d_table_csv(t: &DTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["d_prime", "n_prime", "value", "status", "witness", "seed"])
        .expect("in-memory writer");
    for e in &t.entries {
        let witness = e.decision.witness.as_ref().map(|v| v.join(" ")).unwrap_or_default();
        w.write_record([
            e.dp.to_string(),
            e.np.to_string(),
            e.decision.value.to_string(),
            e.decision.status.as_str().to_string(),
            witness,
            t.seed.to_string(),
        ])
        .expect("in-memory writer");
    }
    finish(w)
}

/// One row per `m`.
pub fn x_table_csv(t: &XTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "m", "value", "confidence", "seed"])
        .expect("in-memory writer");
    for e in &t.entries {
        w.write_record([
            t.k.to_string(),
            e.m.to_string(),
            e.value.to_string(),
            e.confidence.as_str().to_string(),
            t.seed.to_string(),
        ])
        .expect("in-memory writer");
    }
    finish(w)
}
