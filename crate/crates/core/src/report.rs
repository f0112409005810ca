//! CSV writers and gnuplot scripts for run records, histograms, oracle
//! results and trajectories.
//!
//! Floats are written with Rust's shortest round-trip formatting, so output
//! is byte-stable for identical inputs.

use std::io::{self, Write};

use crate::dynamics::{CompassState, Trajectory};
use crate::oracle::OracleResult;
use crate::readout::{HistogramSummary, RunRecord};

pub const RECORDS_HEADER: &str = "instance_id,run_id,seed,final_energy,ground_energy,success,residual_ke";
pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,count";
pub const ORACLE_HEADER: &str = "instance_id,ground_energy,degeneracy";

pub fn write_records<W: Write>(mut out: W, records: &[RunRecord]) -> io::Result<()> {
    writeln!(out, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.instance_id,
            r.run_id,
            r.seed,
            r.final_energy,
            r.ground_energy,
            u8::from(r.success),
            r.residual_ke
        )?;
    }
    Ok(())
}

pub fn records_csv(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

pub fn write_histogram<W: Write>(mut out: W, hist: &HistogramSummary) -> io::Result<()> {
    writeln!(out, "{HISTOGRAM_HEADER}")?;
    for (lo, hi, count) in hist.bins() {
        writeln!(out, "{lo},{hi},{count}")?;
    }
    Ok(())
}

/// One `(instance_id, result)` row per instance.
pub fn write_oracle<'a, W, I>(mut out: W, rows: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (usize, &'a OracleResult)>,
{
    writeln!(out, "{ORACLE_HEADER}")?;
    for (id, r) in rows {
        writeln!(out, "{id},{},{}", r.ground_energy, r.degeneracy)?;
    }
    Ok(())
}

pub fn write_trajectory<W: Write>(mut out: W, trajectory: &Trajectory) -> io::Result<()> {
    let n = trajectory.samples.first().map_or(0, CompassState::n);
    let mut header = String::from("t");
    for i in 0..n {
        header.push_str(&format!(",theta_{i}"));
    }
    for i in 0..n {
        header.push_str(&format!(",omega_{i}"));
    }
    writeln!(out, "{header}")?;
    for s in &trajectory.samples {
        write!(out, "{}", s.t)?;
        for v in s.theta.iter().chain(&s.omega) {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// A trajectory file to plot, with the column of one core and one ancilla
/// angle.
pub struct TrajectoryPlot<'a> {
    pub csv: &'a str,
    pub title: &'a str,
    pub core_column: usize,
    pub ancilla_column: usize,
}

/// Gnuplot script drawing representative core and ancilla angles against
/// time for each trajectory file.
pub fn trajectory_plot_script(plots: &[TrajectoryPlot<'_>], png: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{png}'\n"));
    s.push_str("set xlabel 't'\nset ylabel 'theta (rad)'\nset key outside\n");
    s.push_str("set ytics ('0' 0, 'pi/4' pi/4, 'pi/2' pi/2, '3pi/4' 3*pi/4, 'pi' pi)\n");
    let series: Vec<String> = plots
        .iter()
        .flat_map(|p| {
            [
                format!(
                    "'{}' using 1:{} with lines title '{} core'",
                    p.csv,
                    p.core_column + 2,
                    p.title
                ),
                format!(
                    "'{}' using 1:{} with lines dashtype 2 title '{} ancilla'",
                    p.csv,
                    p.ancilla_column + 2,
                    p.title
                ),
            ]
        })
        .collect();
    s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
    s
}

/// Gnuplot script drawing a success-probability histogram CSV as boxes.
pub fn histogram_plot_script(csv: &str, png: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 800,500\n\
         set output '{png}'\n\
         set title '{title}'\n\
         set xlabel 'success probability'\n\
         set ylabel 'instances'\n\
         set xrange [0:1]\n\
         set style fill solid 0.6\n\
         set boxwidth 0.9 relative\n\
         plot '{csv}' every ::1 using (($1+$2)/2):3 with boxes notitle\n"
    )
}
