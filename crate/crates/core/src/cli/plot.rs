//! Hand-built SVG renderings of run traces and model fits.
//!
//! The command-line tool emits self-contained SVG (no external assets, no
//! scripts) so the plots can be opened in any browser or embedded in
//! reports.  Two renderings exist:
//!
//! * [`trace_svg`] — three stacked panels: the sample size `N_t` and the
//!   fitted shape `θ_t` over the step index, then the empirical cumulative
//!   distribution of the observed risks `v_t` with the tolerance `ε` and
//!   the confidence target `β` marked as dashed guides (their crossing is
//!   the claim "risk at most ε in a fraction β of the steps").  All
//!   replications are overlaid; the first is emphasized.
//! * [`fit_svg`] — a density histogram of observed risks with the fitted
//!   risk density `f(v, N)` at a chosen sample size drawn on top.
//!
//! Coordinates are rounded to two decimals, so identical inputs render
//! byte-identical files.

use std::fmt::Write as _;

use crate::controller::TraceRecord;
use crate::risk_model::BetaRiskModel;

const WIDTH: f64 = 860.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const PANEL_HEIGHT: f64 = 190.0;
const PANEL_GAP: f64 = 52.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 46.0;

const EMPHASIS: &str = "#1f6fb2";
const BACKGROUND_TRACE: &str = "#a9c4da";
const ACCENT: &str = "#d1662c";
const GRID: &str = "#d8dce1";
const TEXT: &str = "#333333";

/// One plotting panel: a data window mapped onto a pixel rectangle.
struct Frame {
    x0: f64,
    y0: f64,
    width: f64,
    height: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn map_x(&self, x: f64) -> f64 {
        self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.width
    }

    fn map_y(&self, y: f64) -> f64 {
        self.y0 + self.height - (y - self.ymin) / (self.ymax - self.ymin) * self.height
    }

    /// Grid lines, tick labels, the enclosing box, and the panel title.
    fn chrome(&self, out: &mut String, title: &str, x_labels: bool) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{TEXT}" font-size="13" font-weight="bold">{title}</text>"#,
            self.x0,
            self.y0 - 8.0,
        );
        for i in 0..=4 {
            let f = f64::from(i) / 4.0;
            let xv = self.xmin + f * (self.xmax - self.xmin);
            let yv = self.ymin + f * (self.ymax - self.ymin);
            let xp = self.map_x(xv);
            let yp = self.map_y(yv);
            let _ = writeln!(
                out,
                r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="{GRID}" stroke-width="1"/>"#,
                self.y0,
                self.y0 + self.height,
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{yp:.2}" x2="{:.2}" y2="{yp:.2}" stroke="{GRID}" stroke-width="1"/>"#,
                self.x0,
                self.x0 + self.width,
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{yp:.2}" fill="{TEXT}" font-size="11" text-anchor="end" dominant-baseline="middle">{}</text>"#,
                self.x0 - 6.0,
                tick_label(yv),
            );
            if x_labels {
                let _ = writeln!(
                    out,
                    r#"<text x="{xp:.2}" y="{:.2}" fill="{TEXT}" font-size="11" text-anchor="middle">{}</text>"#,
                    self.y0 + self.height + 16.0,
                    tick_label(xv),
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{TEXT}" stroke-width="1"/>"#,
            self.x0, self.y0, self.width, self.height,
        );
    }

    fn polyline(&self, out: &mut String, points: &[(f64, f64)], color: &str, width: f64) {
        if points.len() == 1 {
            let (x, y) = points[0];
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                self.map_x(x),
                self.map_y(y),
            );
            return;
        }
        if points.is_empty() {
            return;
        }
        let mut coords = String::new();
        for &(x, y) in points {
            let _ = write!(coords, "{:.2},{:.2} ", self.map_x(x), self.map_y(y));
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            coords.trim_end(),
        );
    }
}

/// Compact tick label: plain decimals in the mid range, scientific
/// notation outside it.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs();
    if !(1e-3..1e4).contains(&magnitude) {
        return format!("{v:.1e}");
    }
    let text = format!("{v:.3}");
    text.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn svg_open(height: f64) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>
"#
    )
}

/// Splits a θ-series into polyline segments, breaking at flat steps.
fn theta_segments(trace: &[TraceRecord]) -> Vec<Vec<(f64, f64)>> {
    let mut segments = Vec::new();
    let mut current = Vec::new();
    for record in trace {
        match record.theta {
            Some(theta) => current.push((record.t as f64, theta)),
            None => {
                if !current.is_empty() {
                    segments.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        segments.push(current);
    }
    segments
}

/// Staircase of the empirical cumulative distribution of `risks`,
/// clipped to `[0, xmax]`.
fn cdf_staircase(risks: &[f64], xmax: f64) -> Vec<(f64, f64)> {
    let mut sorted = risks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut points = vec![(0.0, 0.0)];
    for (i, &v) in sorted.iter().enumerate() {
        let v = v.min(xmax);
        points.push((v, i as f64 / n));
        points.push((v, (i + 1) as f64 / n));
    }
    points.push((xmax, 1.0));
    points
}

/// Renders the three-panel trace figure for one or more replications.
pub fn trace_svg(traces: &[Vec<TraceRecord>], epsilon: f64, beta: f64) -> String {
    assert!(
        traces.iter().any(|t| !t.is_empty()),
        "trace figure needs at least one non-empty trace"
    );
    let t_max = traces
        .iter()
        .flat_map(|t| t.iter().map(|r| r.t))
        .max()
        .expect("non-empty trace") as f64;
    let xmax = t_max.max(2.0);
    let n_max = traces
        .iter()
        .flat_map(|t| t.iter().map(|r| f64::from(r.n)))
        .fold(1.0_f64, f64::max);
    let theta_max = traces
        .iter()
        .flat_map(|t| t.iter().filter_map(|r| r.theta))
        .fold(1.0_f64, f64::max);
    let risk_max = traces
        .iter()
        .flat_map(|t| t.iter().map(|r| r.risk))
        .fold(0.0_f64, f64::max);

    let panel_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let frame = |index: usize, xmax: f64, ymax: f64| Frame {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP + index as f64 * (PANEL_HEIGHT + PANEL_GAP),
        width: panel_width,
        height: PANEL_HEIGHT,
        xmin: 0.0,
        xmax,
        ymin: 0.0,
        ymax,
    };
    let n_frame = frame(0, xmax, 1.05 * n_max);
    let theta_frame = frame(1, xmax, 1.05 * theta_max);
    // Risk axis of the cdf panel: wide enough to show the tolerance with
    // margin, capped at the full [0, 1] range.
    let risk_axis = (1.3 * risk_max).max(2.5 * epsilon).min(1.0);
    let cdf_frame = frame(2, risk_axis, 1.05);

    let height = MARGIN_TOP + 3.0 * PANEL_HEIGHT + 2.0 * PANEL_GAP + MARGIN_BOTTOM;
    let mut out = svg_open(height);
    n_frame.chrome(&mut out, "sample size N over steps", false);
    theta_frame.chrome(&mut out, "fitted shape theta over steps", true);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" fill="{TEXT}" font-size="12" text-anchor="middle">step t</text>"#,
        MARGIN_LEFT + panel_width / 2.0,
        theta_frame.y0 + theta_frame.height + 30.0,
    );
    cdf_frame.chrome(&mut out, "cumulative distribution of observed risk", true);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" fill="{TEXT}" font-size="12" text-anchor="middle">observed risk v</text>"#,
        MARGIN_LEFT + panel_width / 2.0,
        height - 12.0,
    );

    // Background replications first, the emphasized first trace on top.
    for (index, trace) in traces.iter().enumerate().rev() {
        let (color, width) = if index == 0 {
            (EMPHASIS, 1.4)
        } else {
            (BACKGROUND_TRACE, 0.9)
        };
        let n_points: Vec<(f64, f64)> =
            trace.iter().map(|r| (r.t as f64, f64::from(r.n))).collect();
        n_frame.polyline(&mut out, &n_points, color, width);
        for segment in theta_segments(trace) {
            theta_frame.polyline(&mut out, &segment, color, width);
        }
        let risks: Vec<f64> = trace.iter().map(|r| r.risk).collect();
        cdf_frame.polyline(&mut out, &cdf_staircase(&risks, risk_axis), color, width);
    }

    // Tolerance and confidence guides on the cdf panel: the staircase
    // passing above their crossing means "risk at most epsilon in a
    // fraction beta of the steps".
    let eps_x = cdf_frame.map_x(epsilon);
    let beta_y = cdf_frame.map_y(beta);
    let _ = writeln!(
        out,
        r#"<line x1="{eps_x:.2}" y1="{:.2}" x2="{eps_x:.2}" y2="{:.2}" stroke="{ACCENT}" stroke-width="1.2" stroke-dasharray="6 4"/>"#,
        cdf_frame.y0,
        cdf_frame.y0 + cdf_frame.height,
    );
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{beta_y:.2}" x2="{:.2}" y2="{beta_y:.2}" stroke="{ACCENT}" stroke-width="1.2" stroke-dasharray="6 4"/>"#,
        cdf_frame.x0,
        cdf_frame.x0 + cdf_frame.width,
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" fill="{ACCENT}" font-size="11">epsilon = {}</text>"#,
        eps_x + 5.0,
        cdf_frame.y0 + 14.0,
        tick_label(epsilon),
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" fill="{ACCENT}" font-size="11">beta = {}</text>"#,
        cdf_frame.x0 + cdf_frame.width - 80.0,
        beta_y - 5.0,
        tick_label(beta),
    );
    out.push_str("</svg>\n");
    out
}

/// Renders a density histogram of observed risks with the fitted density
/// `f(v, N)` overlaid at sample size `overlay_n` (omitted when the fit
/// was flat).
pub fn fit_svg(risks: &[f64], theta: Option<f64>, overlay_n: u32) -> String {
    assert!(!risks.is_empty(), "fit figure needs at least one risk");
    const BINS: usize = 40;
    let bin_width = 1.0 / BINS as f64;
    let mut counts = [0usize; BINS];
    for &risk in risks {
        let bin = ((risk / bin_width) as usize).min(BINS - 1);
        counts[bin] += 1;
    }
    let densities: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (risks.len() as f64 * bin_width))
        .collect();
    let hist_max = densities.iter().copied().fold(0.0_f64, f64::max);
    let ymax = (1.3 * hist_max).max(1.5);

    let frame = Frame {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP,
        width: WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        height: 2.0 * PANEL_HEIGHT,
        xmin: 0.0,
        xmax: 1.0,
        ymin: 0.0,
        ymax,
    };
    let height = MARGIN_TOP + 2.0 * PANEL_HEIGHT + MARGIN_BOTTOM;
    let mut out = svg_open(height);
    let title = match theta {
        Some(theta) => format!(
            "observed risks and fitted density at N = {overlay_n} (theta = {})",
            tick_label(theta),
        ),
        None => "observed risks (flat likelihood, no fitted density)".to_string(),
    };
    frame.chrome(&mut out, &title, true);

    for (bin, &density) in densities.iter().enumerate() {
        if density == 0.0 {
            continue;
        }
        let x = frame.map_x(bin as f64 * bin_width);
        let y = frame.map_y(density.min(ymax));
        let bar_height = frame.map_y(0.0) - y;
        let bar_width = frame.width / BINS as f64 - 1.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{bar_width:.2}" height="{bar_height:.2}" fill="{EMPHASIS}" fill-opacity="0.55"/>"#,
        );
    }

    if let Some(theta) = theta {
        let model = BetaRiskModel::new(theta).expect("fitted theta is positive and finite");
        const SAMPLES: usize = 400;
        let points: Vec<(f64, f64)> = (0..SAMPLES)
            .map(|k| {
                let v = (k as f64 + 0.5) / SAMPLES as f64;
                (v, model.pdf(v, overlay_n).min(ymax))
            })
            .collect();
        frame.polyline(&mut out, &points, ACCENT, 1.6);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" fill="{TEXT}" font-size="12" text-anchor="middle">observed risk v</text>"#,
        frame.x0 + frame.width / 2.0,
        height - 12.0,
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::SolverStatus;
    use std::time::Duration;

    fn record(t: u64, n: u32, theta: Option<f64>, risk: f64) -> TraceRecord {
        TraceRecord {
            t,
            n,
            theta,
            risk,
            violation: false,
            status: SolverStatus::Ok,
            elapsed: Duration::ZERO,
        }
    }

    #[test]
    fn trace_figure_is_wellformed_and_deterministic() {
        let traces = vec![
            vec![
                record(1, 1, None, 1.0),
                record(2, 22, Some(22.0), 0.04),
                record(3, 80, Some(5.0), 0.02),
            ],
            vec![
                record(1, 1, Some(1.0), 0.3),
                record(2, 10, Some(2.0), 0.1),
                record(3, 40, Some(3.0), 0.05),
            ],
        ];
        let svg = trace_svg(&traces, 0.1, 0.9);
        assert!(svg.starts_with("<svg"), "figure must be a bare SVG element");
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("epsilon = 0.1"));
        assert!(svg.contains("beta = 0.9"));
        // Three titled panels.
        assert!(svg.contains("sample size N over steps"));
        assert!(svg.contains("fitted shape theta over steps"));
        assert!(svg.contains("cumulative distribution of observed risk"));
        // Two traces drawn in each of the three panels.
        assert_eq!(svg.matches("<polyline").count(), 6);
        assert_eq!(
            svg,
            trace_svg(&traces, 0.1, 0.9),
            "rendering is deterministic"
        );
    }

    #[test]
    fn flat_steps_break_the_theta_line() {
        let trace = vec![
            record(1, 1, Some(1.0), 0.5),
            record(2, 5, None, 0.0),
            record(3, 5, Some(2.0), 0.2),
            record(4, 9, Some(2.5), 0.1),
        ];
        let segments = theta_segments(&trace);
        assert_eq!(
            segments,
            vec![vec![(1.0, 1.0)], vec![(3.0, 2.0), (4.0, 2.5)]]
        );
        // The single-point segment renders as a circle, the pair as a line.
        let svg = trace_svg(&[trace], 0.1, 0.9);
        assert!(svg.contains("<circle"));
    }

    #[test]
    fn cdf_staircase_is_monotone_and_spans_the_axis() {
        let points = cdf_staircase(&[0.3, 0.1, 0.2, 0.9], 0.5);
        assert_eq!(points.first(), Some(&(0.0, 0.0)));
        assert_eq!(points.last(), Some(&(0.5, 1.0)));
        for pair in points.windows(2) {
            assert!(pair[1].0 >= pair[0].0, "x must not decrease");
            assert!(pair[1].1 >= pair[0].1, "cdf must not decrease");
        }
        // Three of the four risks lie below the clip; the fourth is clipped.
        assert!(points.contains(&(0.3, 0.75)));
        assert!(points.contains(&(0.5, 1.0)));
    }

    #[test]
    fn fit_figure_overlays_the_density() {
        let risks: Vec<f64> = (0..200).map(|k| (k as f64 + 0.5) / 400.0).collect();
        let svg = fit_svg(&risks, Some(3.0), 30);
        assert!(svg.contains("theta = 3"));
        assert!(svg.contains("<rect"), "histogram bars are rectangles");
        assert!(svg.contains("<polyline"), "density curve is a polyline");

        let flat = fit_svg(&risks, None, 30);
        assert!(flat.contains("flat likelihood"));
        assert!(!flat.contains("<polyline"));
    }

    #[test]
    fn tick_labels_stay_compact() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(0.1), "0.1");
        assert_eq!(tick_label(22.0), "22");
        assert_eq!(tick_label(0.30854), "0.309");
        assert_eq!(tick_label(120000.0), "1.2e5");
        assert_eq!(tick_label(0.00005), "5.0e-5");
    }
}
