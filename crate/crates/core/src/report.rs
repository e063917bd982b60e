//! Result tables: fixed-width text and CSV.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::behavior::BehaviorKind;
use crate::error::{EvacError, Result};
use crate::grid::ExitId;
use crate::stats::{Interval, ReplicationStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsFormat {
    Table,
    Csv,
}

struct Layout {
    exits: Vec<ExitId>,
    mixed: Vec<(ExitId, BehaviorKind)>,
}

fn layout(rows: &[ReplicationStats]) -> Layout {
    let exits: BTreeSet<ExitId> = rows.iter().flat_map(|r| r.exits.keys().copied()).collect();
    let mixed: BTreeSet<(ExitId, BehaviorKind)> = rows
        .iter()
        .flat_map(|r| r.behavior_exits.keys().map(|&(b, e)| (e, b)))
        .collect();
    Layout {
        exits: exits.into_iter().collect(),
        mixed: mixed.into_iter().collect(),
    }
}

fn fmt_ci(i: &Interval) -> String {
    format!("{:.2}-{:.2}", i.lower, i.upper)
}

/// Renders one row per stats entry. Columns: case name, TET, METxI and MDxI
/// intervals, mean count per exit, then mean count per exit and behavior
/// when any row mixes behaviors.
pub fn emit_stats(rows: &[ReplicationStats], format: StatsFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(EvacError::EmptyReplicationSet);
    }
    let l = layout(rows);
    Ok(match format {
        StatsFormat::Table => table(rows, &l),
        StatsFormat::Csv => csv(rows, &l),
    })
}

fn table(rows: &[ReplicationStats], l: &Layout) -> String {
    let mut header = vec![
        "Case".to_string(),
        "TET (s)".to_string(),
        "METxI (s)".to_string(),
        "MDxI (m)".to_string(),
    ];
    header.extend(l.exits.iter().map(|e| format!("# {e}")));
    header.extend(l.mixed.iter().map(|(e, b)| format!("# {e} β{}", b.label())));

    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.name.clone(),
                fmt_ci(&r.tet.ci),
                fmt_ci(&r.met.ci),
                fmt_ci(&r.md.ci),
            ];
            row.extend(l.exits.iter().map(|e| {
                r.exits
                    .get(e)
                    .map_or("-".to_string(), |m| format!("{:.2}", m.mean))
            }));
            row.extend(l.mixed.iter().map(|&(e, b)| {
                r.behavior_exits
                    .get(&(b, e))
                    .map_or("-".to_string(), |m| format!("{:.2}", m.mean))
            }));
            row
        })
        .collect();

    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            std::iter::once(&header)
                .chain(body.iter())
                .map(|row| row[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(&header).chain(body.iter()) {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:<w$}", w = w))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn csv(rows: &[ReplicationStats], l: &Layout) -> String {
    let mut out = String::from("case,replications");
    for m in ["tet", "met", "md"] {
        write!(out, ",{m}_lower,{m}_mean,{m}_upper,{m}_sd").expect("write to string");
    }
    for e in &l.exits {
        write!(out, ",{e}_mean").expect("write to string");
    }
    for (e, b) in &l.mixed {
        write!(out, ",{e}_{}_mean", b.label()).expect("write to string");
    }
    out.push('\n');
    for r in rows {
        write!(out, "{},{}", r.name, r.replications).expect("write to string");
        for m in [&r.tet, &r.met, &r.md] {
            write!(
                out,
                ",{},{},{},{}",
                m.ci.lower, m.ci.mean, m.ci.upper, m.std_dev
            )
            .expect("write to string");
        }
        for e in &l.exits {
            match r.exits.get(e) {
                Some(m) => write!(out, ",{}", m.mean),
                None => write!(out, ","),
            }
            .expect("write to string");
        }
        for &(e, b) in &l.mixed {
            match r.behavior_exits.get(&(b, e)) {
                Some(m) => write!(out, ",{}", m.mean),
                None => write!(out, ","),
            }
            .expect("write to string");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::stats::MetricSummary;

    fn summary(samples: &[f64]) -> MetricSummary {
        MetricSummary::from_samples(samples).unwrap()
    }

    fn stats(name: &str, mixed: bool) -> ReplicationStats {
        let exits: BTreeMap<_, _> = [
            (ExitId(1), summary(&[270.0, 268.0, 271.5])),
            (ExitId(2), summary(&[355.0, 357.0, 353.5])),
        ]
        .into_iter()
        .collect();
        let mut behavior_exits = BTreeMap::new();
        if mixed {
            for (b, e, v) in [
                (BehaviorKind::NearestExit, 1, 134.0),
                (BehaviorKind::NearestExit, 2, 179.0),
                (BehaviorKind::BestPredictedExit, 1, 141.0),
                (BehaviorKind::BestPredictedExit, 2, 171.0),
            ] {
                behavior_exits.insert((b, ExitId(e)), summary(&[v, v + 1.0, v - 1.0]));
            }
        }
        ReplicationStats {
            name: name.to_string(),
            replications: 3,
            population: 625,
            tet: summary(&[44.1, 45.3, 44.4]),
            met: summary(&[15.0 / 7.0, 16.2, 15.9]),
            md: summary(&[11.9, 12.0, 11.85]),
            exits,
            behavior_exits,
            trapped: summary(&[0.0, 0.0, 0.0]),
        }
    }

    #[test]
    fn empty_set_is_an_error() {
        assert_eq!(
            emit_stats(&[], StatsFormat::Csv),
            Err(EvacError::EmptyReplicationSet)
        );
    }

    #[test]
    fn single_behavior_table_has_five_kinds_of_column() {
        let t = emit_stats(&[stats("caseA", false)], StatsFormat::Table).unwrap();
        let header = t.lines().next().unwrap();
        for col in ["Case", "TET (s)", "METxI (s)", "MDxI (m)", "# E1", "# E2"] {
            assert!(header.contains(col), "{header}");
        }
        assert!(!header.contains('β'));
        assert!(t.lines().nth(1).unwrap().starts_with("caseA"));
    }

    #[test]
    fn mixed_table_adds_behavior_columns() {
        let t = emit_stats(&[stats("caseE", true)], StatsFormat::Table).unwrap();
        let header = t.lines().next().unwrap();
        for col in ["# E1 βNE", "# E1 βBPE", "# E2 βNE", "# E2 βBPE"] {
            assert!(header.contains(col), "{header}");
        }
    }

    #[test]
    fn csv_round_trips_numbers() {
        let s = stats("caseE", true);
        let text = emit_stats(std::slice::from_ref(&s), StatsFormat::Csv).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), row.len());
        let get = |col: &str| -> f64 {
            row[header.iter().position(|h| *h == col).unwrap()]
                .parse()
                .unwrap()
        };
        assert_eq!(get("met_mean"), s.met.mean);
        assert_eq!(get("tet_lower"), s.tet.ci.lower);
        assert_eq!(get("md_sd"), s.md.std_dev);
        assert_eq!(get("E2_mean"), s.exits[&ExitId(2)].mean);
        assert_eq!(get("E1_BPE_mean"), 141.0);
        assert!(!text.contains(';'));
    }
}
