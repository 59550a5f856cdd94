//! Log-log scatter plots with the fitted line, as plain SVG.

use std::fmt::Write as _;
use std::path::Path;

use holder_core::dimension::DimensionFit;
use holder_core::measures::DecayFit;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 56.0;

/// Points in natural units and a fitted line `ln y = slope·ln x + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
}

impl LogLogPlot {
    /// Counts against `1/r`, so the slope is the dimension estimate. The
    /// line passes through the centroid of the fitted window.
    pub fn from_dimension_fit(title: &str, fit: &DimensionFit) -> Self {
        let points: Vec<(f64, f64)> = fit
            .scales
            .iter()
            .zip(&fit.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&r, &c)| (1.0 / r, c as f64))
            .collect();
        let fitted: Vec<(f64, f64)> = fit
            .window
            .clone()
            .filter_map(|i| {
                let c = *fit.counts.get(i)?;
                (c > 0).then(|| ((1.0 / fit.scales[i]).ln(), (c as f64).ln()))
            })
            .collect();
        let k = fitted.len().max(1) as f64;
        let (mx, my) = fitted.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
        Self {
            title: title.to_string(),
            x_label: "1/r".into(),
            y_label: "packing count".into(),
            points,
            slope: fit.slope,
            intercept: my - fit.slope * mx,
        }
    }

    pub fn from_decay_fit(title: &str, fit: &DecayFit) -> Self {
        Self {
            title: title.to_string(),
            x_label: "frequency".into(),
            y_label: "mean |Fourier transform|^2".into(),
            points: fit.profile.band_averages.clone(),
            slope: fit.fit.slope,
            intercept: fit.fit.intercept,
        }
    }

    /// The SVG document. Identical inputs give identical bytes.
    pub fn to_svg(&self) -> Result<String, PlotError> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| (x.ln(), y.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(PlotError::TooFewPoints(pts.len()));
        }
        let (x0, x1) = bounds(pts.iter().map(|p| p.0));
        let line = |x: f64| self.slope * x + self.intercept;
        let (y0, y1) = bounds(
            pts.iter()
                .map(|p| p.1)
                .chain([line(x0), line(x1)])
                .filter(|v| v.is_finite()),
        );
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">log {}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {})">log {}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        if line(x0).is_finite() && line(x1).is_finite() {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5"/>"#,
                sx(x0),
                sy(line(x0)),
                sx(x1),
                sy(line(x1))
            );
        }
        for (x, y) in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
                sx(*x),
                sy(*y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="13">slope {:.3}</text>"#,
            MARGIN + 8.0,
            MARGIN + 18.0,
            self.slope
        );
        s.push_str("</svg>\n");
        Ok(s)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("a log-log plot needs at least 2 positive points, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes the plot to `path`. Nothing is written when the plot is invalid.
pub fn emit_plot(plot: &LogLogPlot, path: &Path) -> Result<(), PlotError> {
    let svg = plot.to_svg()?;
    std::fs::write(path, svg)?;
    Ok(())
}
