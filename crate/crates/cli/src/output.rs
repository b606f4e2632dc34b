//! CSV and gnuplot writers.

use std::io::Write;
use std::path::Path;

use crate::recipes::Row;
use crate::CliError;

pub const HEADER: [&str; 6] = ["snr_db", "metric", "value_bits", "stderr_bits", "trials", "seed"];

/// Fixed formatting so identical rows give identical bytes.
pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            format!("{}", r.snr_db),
            r.metric.clone(),
            format!("{:.9}", r.value),
            format!("{:.9}", r.stderr),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    write_csv(std::io::BufWriter::new(file), rows)
}

/// Gnuplot script drawing one line per metric against SNR.
pub fn plot_script(csv_path: &Path, rows: &[Row]) -> String {
    let mut metrics: Vec<&str> = Vec::new();
    for r in rows {
        if !metrics.contains(&r.metric.as_str()) {
            metrics.push(&r.metric);
        }
    }
    let csv = csv_path.display();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set xlabel 'SNR [dB]'\nset ylabel 'rate [bit/channel use]'\n");
    s.push_str("set key left top\nset grid\n");
    let plots: Vec<String> = metrics
        .iter()
        .map(|m| {
            format!("'{csv}' using 1:(strcol(2) eq '{m}' ? $3 : 1/0) with linespoints title '{m}'")
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(snr_db: f64, metric: &str, value: f64) -> Row {
        Row { snr_db, metric: metric.into(), value, stderr: 0.0, trials: 0, seed: 7 }
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row(0.0, "rc_lb", 1.0 / 3.0), row(2.5, "rc_lb", 2.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "snr_db,metric,value_bits,stderr_bits,trials,seed\n\
             0,rc_lb,0.333333333,0.000000000,0,7\n\
             2.5,rc_lb,2.000000000,0.000000000,0,7\n"
        );
    }

    #[test]
    fn one_plot_per_metric() {
        let rows = [row(0.0, "a", 1.0), row(0.0, "b", 1.0), row(5.0, "a", 2.0)];
        let script = plot_script(Path::new("out.csv"), &rows);
        assert_eq!(script.matches("with linespoints").count(), 2);
        assert!(script.contains("'out.csv'"));
    }
}
