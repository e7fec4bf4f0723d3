//! CSV, JSON and SVG artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::ConvergenceReport;
use crate::sim::Trajectory;

pub const TRAJECTORY_HEADER: &str = "t,x,y,psi,stable";
pub const CONVERGENCE_HEADER: &str = "eval,mean_F,algorithm,scenario";

/// One row per sample; `stable` is written as 1 or 0.
pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let mut out = String::with_capacity(48 * trajectory.samples.len());
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &trajectory.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.t,
            s.pose.x,
            s.pose.y,
            s.pose.psi,
            u8::from(s.stable)
        );
    }
    out
}

/// Mean best-so-far curves of all reports, evaluations numbered from 1.
pub fn convergence_csv(reports: &[ConvergenceReport]) -> String {
    let mut out = String::new();
    out.push_str(CONVERGENCE_HEADER);
    out.push('\n');
    for r in reports {
        for (e, f) in r.mean_curve.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", e + 1, f, r.algorithm, r.scenario);
        }
    }
    out
}

/// Pretty-printed JSON with a trailing newline. Field order follows the
/// struct definitions, so output is byte-stable.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Plot {
    width: f64,
    height: f64,
    margin: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Plot {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if hi - lo > 1e-12 {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        Plot {
            width: 720.0,
            height: 480.0,
            margin: 60.0,
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.margin + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - 2.0 * self.margin)
    }

    fn py(&self, y: f64) -> f64 {
        self.height
            - self.margin
            - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - 2.0 * self.margin)
    }

    fn open(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (w, h, m) = (self.width, self.height, self.margin);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            w / 2.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            w - 2.0 * m,
            h - 2.0 * m
        );
        for (v, anchor_x) in [(self.x.0, self.px(self.x.0)), (self.x.1, self.px(self.x.1))] {
            let _ = writeln!(
                out,
                r#"<text x="{anchor_x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                h - m + 16.0,
                tick(v)
            );
        }
        for (v, anchor_y) in [(self.y.0, self.py(self.y.0)), (self.y.1, self.py(self.y.1))] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                m - 6.0,
                anchor_y + 4.0,
                tick(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            w / 2.0,
            h - 16.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            escape(y_label)
        );
    }

    fn series(
        &self,
        out: &mut String,
        slot: usize,
        label: &str,
        points: impl Iterator<Item = (f64, f64)>,
    ) {
        let colour = PALETTE[slot % PALETTE.len()];
        let mut path = String::new();
        for (x, y) in points {
            let _ = write!(path, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"/>"#,
            path.trim_end()
        );
        if label.is_empty() {
            return;
        }
        let ly = self.margin + 14.0 + 14.0 * slot as f64;
        let lx = self.width - self.margin - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{ly}">{}</text>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0,
            lx + 24.0,
            escape(label)
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Planar paths `(x, y)` of trajectories in one figure. Series with an
/// empty label get no legend entry.
pub fn trajectory_svg(title: &str, series: &[(String, &Trajectory)]) -> String {
    let all = || series.iter().flat_map(|(_, t)| t.samples.iter());
    let mut plot = Plot::new(
        bounds(all().map(|s| s.pose.x)),
        bounds(all().map(|s| s.pose.y)),
    );
    if series.is_empty() {
        plot = Plot::new((0.0, 1.0), (0.0, 1.0));
    }
    let mut out = String::new();
    plot.open(&mut out, title, "x [m]", "y [m]");
    for (i, (label, traj)) in series.iter().enumerate() {
        plot.series(
            &mut out,
            i,
            label,
            traj.samples.iter().map(|s| (s.pose.x, s.pose.y)),
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Mean best-so-far objective against evaluation count, one line per report.
pub fn convergence_svg(title: &str, reports: &[ConvergenceReport]) -> String {
    let budget = reports
        .iter()
        .map(|r| r.mean_curve.len())
        .max()
        .unwrap_or(1)
        .max(1);
    let y = bounds(reports.iter().flat_map(|r| r.mean_curve.iter().copied()));
    let plot = if reports.is_empty() {
        Plot::new((1.0, 2.0), (0.0, 1.0))
    } else {
        Plot::new((1.0, budget as f64), y)
    };
    let mut out = String::new();
    plot.open(&mut out, title, "evaluations", "mean best F [m]");
    for (i, r) in reports.iter().enumerate() {
        let label = format!("{} {}", r.algorithm, r.scenario);
        plot.series(
            &mut out,
            i,
            &label,
            r.mean_curve
                .iter()
                .enumerate()
                .map(|(e, &f)| ((e + 1) as f64, f)),
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes a set of files into one directory. Unless `commit` is called,
/// every file written so far is removed when the writer is dropped, so a
/// failed command leaves no partial output behind.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
    committed: bool,
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let created_dir = !dir.exists();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(ArtifactWriter {
            dir,
            created_dir,
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.write(name, &to_json(value)?)
    }

    /// Keeps the files and returns their paths in write order.
    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for ArtifactWriter {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}
