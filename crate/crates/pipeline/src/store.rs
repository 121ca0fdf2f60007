//! Window store for the visual modality.
//!
//! One row per sample: `session_id,start,step,pc0..pc{q-1}`, preceded by a
//! `# window=W,overlap=O,dim=q` line.

use std::fmt::Write as _;
use std::path::Path;

use phq_core::face::{Window, WindowBatch};

use crate::error::{read, write, Error, Result};

pub fn windows_to_csv(batch: &WindowBatch<f64>) -> String {
    let mut out = format!("# window={},overlap={},dim={}\nsession_id,start,step", batch.window, batch.overlap, batch.dim);
    for j in 0..batch.dim {
        let _ = write!(out, ",pc{j}");
    }
    out.push('\n');
    for w in &batch.windows {
        for (step, sample) in w.samples.iter().enumerate() {
            let _ = write!(out, "{},{},{}", w.session_id, w.start, step);
            for v in sample {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_windows(text: &str, origin: &Path) -> Result<WindowBatch<f64>> {
    let bad = |line: usize, m: &str| Error::Corpus(format!("{}:{line}: {m}", origin.display()));
    let mut lines = text.lines();
    let meta = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| bad(1, "missing window header"))?;
    let mut shape = [None; 3];
    for field in meta.split(',') {
        let (k, v) = field.split_once('=').ok_or_else(|| bad(1, "malformed window header"))?;
        let v: usize = v.parse().map_err(|_| bad(1, "malformed window header"))?;
        match k {
            "window" => shape[0] = Some(v),
            "overlap" => shape[1] = Some(v),
            "dim" => shape[2] = Some(v),
            _ => return Err(bad(1, "unknown window header key")),
        }
    }
    let [Some(window), Some(overlap), Some(dim)] = shape else {
        return Err(bad(1, "incomplete window header"));
    };
    lines.next().ok_or_else(|| bad(2, "missing column header"))?;
    let mut batch = WindowBatch::new(window, overlap, dim);
    for (i, line) in lines.enumerate() {
        let lineno = i + 3;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 + dim {
            return Err(bad(lineno, "wrong column count"));
        }
        let start: usize = fields[1].parse().map_err(|_| bad(lineno, "bad start"))?;
        let step: usize = fields[2].parse().map_err(|_| bad(lineno, "bad step"))?;
        let sample = fields[3..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(lineno, "bad number")))
            .collect::<Result<Vec<f64>>>()?;
        if step == 0 {
            batch.windows.push(Window {
                session_id: fields[0].to_string(),
                start,
                samples: Vec::with_capacity(window),
                label: None,
            });
        }
        let w = batch
            .windows
            .last_mut()
            .filter(|w| w.session_id == fields[0] && w.start == start && w.samples.len() == step)
            .ok_or_else(|| bad(lineno, "samples out of order"))?;
        w.samples.push(sample);
    }
    if batch.windows.iter().any(|w| w.samples.len() != window) {
        return Err(bad(0, "truncated window"));
    }
    Ok(batch)
}

pub fn save_windows(path: &Path, batch: &WindowBatch<f64>) -> Result<()> {
    write(path, windows_to_csv(batch))
}

pub fn load_windows(path: &Path) -> Result<WindowBatch<f64>> {
    parse_windows(&read(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_csv_round_trip() {
        let mut batch = WindowBatch::new(2, 1, 2);
        for (id, start) in [("300", 0), ("300", 1), ("301", 0)] {
            batch.windows.push(Window {
                session_id: id.into(),
                start,
                samples: vec![vec![0.1, -2.5], vec![1e-17, 3.0]],
                label: None,
            });
        }
        let text = windows_to_csv(&batch);
        assert_eq!(parse_windows(&text, Path::new("w.csv")).unwrap(), batch);
        let truncated: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(parse_windows(&truncated, Path::new("w.csv")).is_err());
    }
}
