//! Hard alignments from attention weights, and alignment diagrams.
//!
//! Weights are always supplied from outside (a file or a caller-built
//! matrix); nothing here learns them. Each target segment links to the
//! source segment with the largest weight in its row, ties going to the
//! lower source index.

use std::fmt::Write as _;

use crate::segcore::{MarkerPolicy, Origin, Segmentation};
use crate::{Error, Result};

/// A `|target| × |source|` matrix of nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMatrix {
    source: Segmentation,
    target: Segmentation,
    weights: Vec<Vec<f64>>,
}

impl AttentionMatrix {
    pub fn new(
        source: Segmentation,
        target: Segmentation,
        weights: Vec<Vec<f64>>,
    ) -> Result<AttentionMatrix> {
        if weights.len() != target.len() {
            return Err(Error::Integrity(format!(
                "{} weight rows for {} target segments",
                weights.len(),
                target.len()
            )));
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != source.len() {
                return Err(Error::Integrity(format!(
                    "row {i} has {} weights for {} source segments",
                    row.len(),
                    source.len()
                )));
            }
            if let Some(w) = row.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(Error::Integrity(format!("row {i} has invalid weight {w}")));
            }
            if !row.iter().any(|&w| w > 0.0) {
                return Err(Error::DegenerateRow { row: i });
            }
        }
        Ok(AttentionMatrix {
            source,
            target,
            weights,
        })
    }

    /// Convenience constructor from plain segment lists.
    pub fn from_segments<S: AsRef<str>>(
        source: &[S],
        target: &[S],
        weights: Vec<Vec<f64>>,
    ) -> Result<AttentionMatrix> {
        AttentionMatrix::new(external(source)?, external(target)?, weights)
    }

    pub fn source(&self) -> &Segmentation {
        &self.source
    }

    pub fn target(&self) -> &Segmentation {
        &self.target
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Parses the matrix file format: source segments on line 1, target
    /// segments on line 2, then one whitespace-separated row per target
    /// segment.
    pub fn from_file_str(text: &str) -> Result<AttentionMatrix> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, src) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing source segment line"))?;
        let (tgt_no, tgt) = lines
            .next()
            .ok_or_else(|| Error::parse(2, "missing target segment line"))?;
        let src: Vec<&str> = src.split_whitespace().collect();
        let tgt: Vec<&str> = tgt.split_whitespace().collect();
        let source = external(&src).map_err(|e| Error::parse(1, e.to_string()))?;
        let target = external(&tgt).map_err(|e| Error::parse(tgt_no + 1, e.to_string()))?;
        let mut weights = Vec::new();
        for (idx, line) in lines {
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(idx + 1, format!("bad weight {t:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            weights.push(row);
        }
        AttentionMatrix::new(source, target, weights)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.source.segments().join(" "));
        let _ = writeln!(out, "{}", self.target.segments().join(" "));
        for row in &self.weights {
            let cells: Vec<String> = row.iter().map(|w| w.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }
}

fn external<S: AsRef<str>>(segments: &[S]) -> Result<Segmentation> {
    Segmentation::new(
        segments.iter().map(|s| s.as_ref().to_owned()).collect(),
        MarkerPolicy::none(),
        Origin::External,
    )
}

/// One `(target, source)` link per target index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alignment {
    pub links: Vec<(usize, usize)>,
}

impl Alignment {
    /// Source index linked to target `t`.
    pub fn source_of(&self, t: usize) -> Option<usize> {
        self.links.iter().find(|(ti, _)| *ti == t).map(|(_, s)| *s)
    }

    pub fn is_consistent_with(&self, am: &AttentionMatrix) -> bool {
        let n_t = am.target.len();
        let n_s = am.source.len();
        self.links.len() == n_t
            && self
                .links
                .iter()
                .enumerate()
                .all(|(i, &(t, s))| t == i && s < n_s)
    }
}

pub fn hard_align(am: &AttentionMatrix) -> Result<Alignment> {
    let links = am
        .weights
        .iter()
        .enumerate()
        .map(|(t, row)| {
            let mut best: Option<(usize, f64)> = None;
            for (s, &w) in row.iter().enumerate() {
                if w > 0.0 && best.is_none_or(|(_, bw)| w > bw) {
                    best = Some((s, w));
                }
            }
            best.map(|(s, _)| (t, s))
                .ok_or(Error::DegenerateRow { row: t })
        })
        .collect::<Result<_>>()?;
    Ok(Alignment { links })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Svg,
}

pub fn render(am: &AttentionMatrix, al: &Alignment, format: RenderFormat) -> Result<String> {
    if !al.is_consistent_with(am) {
        return Err(Error::Render(format!(
            "alignment with {} links does not fit a {}x{} matrix",
            al.links.len(),
            am.target.len(),
            am.source.len()
        )));
    }
    Ok(match format {
        RenderFormat::Text => render_text(am, al),
        RenderFormat::Svg => render_svg(am, al),
    })
}

const GAP: usize = 3;
const LINK_ROWS: usize = 4;

/// Start column and width (in chars) of each segment, with the row centred
/// in `width` columns.
fn layout(segments: &[String], width: usize) -> Vec<(usize, usize)> {
    let widths: Vec<usize> = segments.iter().map(|s| s.chars().count()).collect();
    let row_width = widths.iter().sum::<usize>() + GAP * widths.len().saturating_sub(1);
    let mut x = (width - row_width) / 2;
    widths
        .into_iter()
        .map(|w| {
            let start = x;
            x += w + GAP;
            (start, w)
        })
        .collect()
}

fn row_width(segments: &[String]) -> usize {
    segments.iter().map(|s| s.chars().count()).sum::<usize>()
        + GAP * segments.len().saturating_sub(1)
}

fn render_text(am: &AttentionMatrix, al: &Alignment) -> String {
    let src = am.source.segments();
    let tgt = am.target.segments();
    let width = row_width(src).max(row_width(tgt));
    let src_pos = layout(src, width);
    let tgt_pos = layout(tgt, width);
    let center = |(start, w): (usize, usize)| start + w.saturating_sub(1) / 2;

    let draw_row = |segs: &[String], pos: &[(usize, usize)]| -> String {
        let mut line = vec![' '; width];
        for (seg, &(start, _)) in segs.iter().zip(pos) {
            for (i, c) in seg.chars().enumerate() {
                line[start + i] = c;
            }
        }
        line.into_iter().collect::<String>().trim_end().to_owned()
    };

    let mut grid = vec![vec![' '; width]; LINK_ROWS];
    for &(t, s) in &al.links {
        let top = center(src_pos[s]) as f64;
        let bottom = center(tgt_pos[t]) as f64;
        let glyph = match bottom.partial_cmp(&top) {
            Some(std::cmp::Ordering::Greater) => '\\',
            Some(std::cmp::Ordering::Less) => '/',
            _ => '|',
        };
        for (r, row) in grid.iter_mut().enumerate() {
            let frac = (r as f64 + 0.5) / LINK_ROWS as f64;
            let x = (top + (bottom - top) * frac).round() as usize;
            let x = x.min(width.saturating_sub(1));
            row[x] = match row[x] {
                ' ' => glyph,
                c if c == glyph => c,
                _ => 'X',
            };
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "{}", draw_row(src, &src_pos));
    for row in grid {
        let _ = writeln!(out, "{}", row.into_iter().collect::<String>().trim_end());
    }
    let _ = writeln!(out, "{}", draw_row(tgt, &tgt_pos));
    let _ = writeln!(out);
    for &(t, s) in &al.links {
        let _ = writeln!(
            out,
            "link\t{t}\t{}\t{s}\t{}\t{}",
            tgt[t],
            src[s],
            fmt_weight(am.weights[t][s])
        );
    }
    out
}

fn fmt_weight(w: f64) -> String {
    format!("{w:.4}")
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const CHAR_PX: usize = 12;
const MARGIN: usize = 20;
const HEIGHT: usize = 160;

fn render_svg(am: &AttentionMatrix, al: &Alignment) -> String {
    let src = am.source.segments();
    let tgt = am.target.segments();
    let width_chars = row_width(src).max(row_width(tgt));
    let src_pos = layout(src, width_chars);
    let tgt_pos = layout(tgt, width_chars);
    let px = |(start, w): (usize, usize)| MARGIN + (start * CHAR_PX) + (w * CHAR_PX) / 2;
    let width = width_chars * CHAR_PX + 2 * MARGIN;
    let (top_text, top_line, bottom_line, bottom_text) = (30, 42, HEIGHT - 42, HEIGHT - 22);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{HEIGHT}" viewBox="0 0 {width} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"  <rect width="{width}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"  <g font-family="monospace" font-size="16" text-anchor="middle" fill="black">"#
    );
    for (i, seg) in src.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"    <text class="source" data-index="{i}" x="{}" y="{top_text}">{}</text>"#,
            px(src_pos[i]),
            xml_escape(seg)
        );
    }
    for (i, seg) in tgt.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"    <text class="target" data-index="{i}" x="{}" y="{bottom_text}">{}</text>"#,
            px(tgt_pos[i]),
            xml_escape(seg)
        );
    }
    let _ = writeln!(out, "  </g>");
    let _ = writeln!(out, r#"  <g stroke="black" stroke-linecap="round">"#);
    for &(t, s) in &al.links {
        let row_max = am.weights[t].iter().cloned().fold(0.0, f64::max);
        let strength = am.weights[t][s] / row_max;
        let _ = writeln!(
            out,
            r#"    <line class="link" data-target="{t}" data-source="{s}" x1="{}" y1="{top_line}" x2="{}" y2="{bottom_line}" stroke-width="{:.2}"/>"#,
            px(src_pos[s]),
            px(tgt_pos[t]),
            1.0 + strength
        );
    }
    let _ = writeln!(out, "  </g>");
    let _ = writeln!(out, "</svg>");
    out
}
