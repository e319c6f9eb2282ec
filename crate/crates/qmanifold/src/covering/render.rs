use std::fmt::Write;

use super::Covering;

const SIZE: f64 = 640.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

impl Covering {
    /// Boxes per level and the verification cloud on `[0,1]²`; `None` unless `d = 2`.
    pub fn svg(&self, max_points: usize) -> Option<String> {
        if self.report.d != 2 {
            return None;
        }
        let px = |v: f64| v * SIZE;
        let py = |v: f64| (1.0 - v) * SIZE;
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        )
        .ok()?;
        writeln!(
            s,
            r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white" stroke="black"/>"#
        )
        .ok()?;
        for (i, level) in self.levels.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            writeln!(
                s,
                r#"<g fill="none" stroke="{color}" stroke-width="0.4" stroke-opacity="0.6">"#
            )
            .ok()?;
            for g in &level.graphs {
                let (x0, y0, w, h) = g.rect()?;
                writeln!(
                    s,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
                    px(x0),
                    py(y0 + h),
                    w * SIZE,
                    h * SIZE
                )
                .ok()?;
            }
            writeln!(s, "</g>").ok()?;
        }
        writeln!(s, r#"<g fill="black">"#).ok()?;
        for x in self.samples.iter().take(max_points) {
            writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="0.8"/>"#, px(x[0]), py(x[1])).ok()?;
        }
        writeln!(s, "</g>\n</svg>").ok()?;
        Some(s)
    }

    /// One row per graph and bound, with the worst value over its audit points.
    pub fn audit_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "level",
            "graph",
            "pivot",
            "center",
            "bound_name",
            "bound",
            "measured",
            "margin",
        ])
        .expect("in-memory writer");
        for level in &self.levels {
            for (id, g) in level.graphs.iter().enumerate() {
                let center = g.center.iter().map(|v| format!("{v:.9}")).collect::<Vec<_>>().join(" ");
                for (name, bound, measured, margin) in g.audit.rows() {
                    w.write_record([
                        level.j.to_string(),
                        id.to_string(),
                        g.pivot.to_string(),
                        center.clone(),
                        name.to_string(),
                        format!("{bound:e}"),
                        format!("{measured:e}"),
                        format!("{margin:e}"),
                    ])
                    .expect("in-memory writer");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }
}
