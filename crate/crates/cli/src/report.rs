use std::io::Write;

use perfcal::algomodel::Prediction;
use perfcal::fmt::{percent, seconds};
use perfcal::rank::RankRow;
use perfcal::{Result, Variant};

pub fn prediction_text<W: Write>(out: &mut W, pred: &Prediction) -> Result<()> {
    let s = &pred.scenario;
    writeln!(
        out,
        "{} {}  n={} p={} c={} r={} t={}",
        s.algorithm, s.variant, s.n, s.p, s.c, s.r, s.t
    )?;
    writeln!(out, "total_s       {}", seconds(pred.total_s))?;
    writeln!(out, "percent_peak  {}", percent(pred.percent_peak))?;
    for ph in &pred.phases {
        writeln!(out, "  {:<18} {}", ph.label, seconds(ph.seconds))?;
    }
    Ok(())
}

pub fn prediction_csv<W: Write>(out: &mut W, pred: &Prediction) -> Result<()> {
    let s = &pred.scenario;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algo", "variant", "n", "p", "c", "r", "t", "total_s", "percent_peak"])?;
    w.write_record([
        s.algorithm.to_string(),
        s.variant.to_string(),
        s.n.to_string(),
        s.p.to_string(),
        s.c.to_string(),
        s.r.to_string(),
        s.t.to_string(),
        seconds(pred.total_s),
        percent(pred.percent_peak),
    ])?;
    w.flush()?;
    Ok(())
}

/// Percent of peak per variant; the winner is starred, invalid cells show `-`
/// and are explained below the table.
pub fn rank_text<W: Write>(out: &mut W, rows: &[RankRow]) -> Result<()> {
    write!(out, "{:>8} {:>8}", "n", "p")?;
    for v in Variant::ALL {
        write!(out, " {:>14}", v.as_str())?;
    }
    writeln!(out, "  winner")?;
    let mut skipped = Vec::new();
    for row in rows {
        write!(out, "{:>8} {:>8}", row.n, row.p)?;
        for o in &row.outcomes {
            let cell = match &o.result {
                Ok(pred) => {
                    let star = if row.winner == Some(o.variant) { "*" } else { "" };
                    if o.variant.is_replicated() {
                        format!("{}{star} c={}", percent(pred.percent_peak), pred.scenario.c)
                    } else {
                        format!("{}{star}", percent(pred.percent_peak))
                    }
                }
                Err(e) => {
                    skipped.push(format!("n={} p={} {}: {e}", row.n, row.p, o.variant));
                    "-".to_string()
                }
            };
            write!(out, " {cell:>14}")?;
        }
        let winner = row.winner.map(|v| v.as_str()).unwrap_or("-");
        writeln!(out, "  {winner}")?;
    }
    for s in skipped {
        writeln!(out, "skipped: {s}")?;
    }
    Ok(())
}

/// One line per (n, p, variant).
pub fn rank_csv<W: Write>(out: &mut W, rows: &[RankRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "p", "variant", "c", "total_s", "percent_peak", "winner", "error"])?;
    for row in rows {
        for o in &row.outcomes {
            let winner = if row.winner == Some(o.variant) { "1" } else { "0" };
            let (n, p, v) = (row.n.to_string(), row.p.to_string(), o.variant.to_string());
            match &o.result {
                Ok(pred) => w.write_record([
                    n,
                    p,
                    v,
                    pred.scenario.c.to_string(),
                    seconds(pred.total_s),
                    percent(pred.percent_peak),
                    winner.to_string(),
                    String::new(),
                ])?,
                Err(e) => w.write_record([n, p, v, String::new(), String::new(), String::new(), winner.to_string(), e.clone()])?,
            }
        }
    }
    w.flush()?;
    Ok(())
}
