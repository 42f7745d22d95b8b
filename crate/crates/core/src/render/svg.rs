use std::fmt::Write as _;

use crate::geom::{fmt_num, pt_to_mm};
use crate::rules::Alignment;
use crate::typeset::layout::{Fill, Frame, FrameKind, GradientSide, Layer, LayoutDocument, Line, Page};

use super::fmt3;

/// One standalone SVG document per page, in reading order. The back
/// cover is rendered separately with [`render_page`].
pub fn render_svg(doc: &LayoutDocument) -> Vec<String> {
    doc.pages.iter().map(render_page).collect()
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Splits a font key `"Family weight"` into family and SVG weight.
fn font_attrs(font: &str) -> String {
    let (family, weight) = match font.rsplit_once(' ') {
        Some((f, w)) if matches!(w, "regular" | "bold" | "italic" | "light" | "medium") => (f, w),
        _ => (font, "regular"),
    };
    let mut s = format!(" font-family=\"{}\"", esc(family));
    if weight == "bold" {
        s.push_str(" font-weight=\"bold\"");
    }
    s
}

pub fn render_page(page: &Page) -> String {
    let mut out = String::new();
    let (w, h) = (fmt_num(page.width), fmt_num(page.height));
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\" width=\"{w}mm\" height=\"{h}mm\" viewBox=\"0 0 {w} {h}\">"
    );
    let mut defs = String::new();
    let mut body = String::new();
    for layer in [Layer::Background, Layer::Content, Layer::Furniture] {
        let _ = writeln!(body, "<g class=\"{}\">", layer_name(layer));
        for (i, f) in page.frames.iter().enumerate().filter(|(_, f)| f.layer == layer) {
            frame(f, i, &mut defs, &mut body);
        }
        body.push_str("</g>\n");
    }
    if !defs.is_empty() {
        let _ = write!(out, "<defs>\n{defs}</defs>\n");
    }
    out.push_str(&body);
    out.push_str("</svg>\n");
    out
}

fn layer_name(l: Layer) -> &'static str {
    match l {
        Layer::Background => "background",
        Layer::Content => "content",
        Layer::Furniture => "furniture",
    }
}

fn rect_attrs(f: &Frame) -> String {
    format!(
        "x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"",
        fmt3(f.rect.x),
        fmt3(f.rect.y),
        fmt3(f.rect.w),
        fmt3(f.rect.h)
    )
}

fn frame(f: &Frame, index: usize, defs: &mut String, out: &mut String) {
    match &f.kind {
        FrameKind::Decor(d) => match &d.fill {
            Fill::Solid { color } => {
                let _ = writeln!(out, "<rect {} fill=\"{}\"/>", rect_attrs(f), color.to_hex());
            }
            Fill::Gradient { color, to, from } => {
                let id = format!("g{index}");
                let (x1, x2) = match from {
                    GradientSide::Left => ("0", "1"),
                    GradientSide::Right => ("1", "0"),
                };
                let _ = writeln!(
                    defs,
                    "<linearGradient id=\"{id}\" x1=\"{x1}\" y1=\"0\" x2=\"{x2}\" y2=\"0\"><stop offset=\"0\" stop-color=\"{}\"/><stop offset=\"1\" stop-color=\"{}\"/></linearGradient>",
                    color.to_hex(),
                    to.to_hex()
                );
                let _ = writeln!(out, "<rect {} fill=\"url(#{id})\"/>", rect_attrs(f));
            }
        },
        FrameKind::Image(img) => {
            let _ = writeln!(
                out,
                "<image {} xlink:href=\"{}\" preserveAspectRatio=\"none\"/>",
                rect_attrs(f),
                esc(&img.src)
            );
        }
        FrameKind::Text(t) => {
            let _ = writeln!(out, "<g{} font-size=\"{}\">", font_attrs(&t.font), fmt3(pt_to_mm(t.size)));
            for l in &t.lines {
                line(l, t.size, out);
            }
            out.push_str("</g>\n");
        }
        FrameKind::Caption(c) => {
            if c.rotated {
                let _ = writeln!(
                    out,
                    "<g transform=\"translate({} {}) rotate(90)\"{} font-size=\"{}\">",
                    fmt3(f.rect.right()),
                    fmt3(f.rect.y),
                    font_attrs(&c.font),
                    fmt3(pt_to_mm(c.size))
                );
            } else {
                let _ = writeln!(out, "<g{} font-size=\"{}\">", font_attrs(&c.font), fmt3(pt_to_mm(c.size)));
            }
            for l in &c.lines {
                line(l, c.size, out);
            }
            out.push_str("</g>\n");
        }
        FrameKind::Header(hf) => {
            let size = pt_to_mm(hf.size);
            if hf.rotation == 90 {
                let _ = writeln!(
                    out,
                    "<text transform=\"translate({} {}) rotate(90)\" x=\"0\" y=\"{}\"{} font-size=\"{}\">{}</text>",
                    fmt3(f.rect.right()),
                    fmt3(f.rect.y),
                    fmt3(f.rect.w * 0.8),
                    font_attrs(&hf.font),
                    fmt3(size),
                    esc(&hf.text)
                );
            } else {
                let (x, anchor) = anchor(f, hf.alignment);
                let _ = writeln!(
                    out,
                    "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\"{} font-size=\"{}\">{}</text>",
                    fmt3(x),
                    fmt3(f.rect.y + f.rect.h * 0.8),
                    font_attrs(&hf.font),
                    fmt3(size),
                    esc(&hf.text)
                );
            }
        }
        FrameKind::PageNumber(n) => {
            let (x, anchor) = anchor(f, n.alignment);
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\"{} font-size=\"{}\">{}</text>",
                fmt3(x),
                fmt3(f.rect.y + f.rect.h * 0.8),
                font_attrs(&n.font),
                fmt3(pt_to_mm(n.size)),
                n.number
            );
        }
    }
}

fn anchor(f: &Frame, a: Alignment) -> (f64, &'static str) {
    match a {
        Alignment::Right => (f.rect.right(), "end"),
        Alignment::Centre => (f.rect.x + f.rect.w / 2.0, "middle"),
        _ => (f.rect.x, "start"),
    }
}

/// A line as one text element with each run positioned explicitly.
fn line(l: &Line, size: f64, out: &mut String) {
    let ls = l.letter_spacing * pt_to_mm(size);
    let ws = l.space * (l.word_spacing - 1.0);
    let _ = write!(
        out,
        "<text y=\"{}\" letter-spacing=\"{}\" word-spacing=\"{}\">",
        fmt3(l.baseline),
        fmt3(ls),
        fmt3(ws)
    );
    for r in &l.runs {
        let mut attrs = String::new();
        if r.style.bold {
            attrs.push_str(" font-weight=\"bold\"");
        }
        if r.style.italic {
            attrs.push_str(" font-style=\"italic\"");
        }
        if r.style.small_caps {
            attrs.push_str(" font-variant=\"small-caps\"");
        }
        let _ = write!(
            out,
            "<tspan x=\"{}\"{attrs} xml:space=\"preserve\">{}</tspan>",
            fmt3(l.x + r.dx),
            esc(&r.text)
        );
    }
    out.push_str("</text>\n");
}
