//! Reduces crawled pages to plain reading markup.

use std::borrow::Cow;
use std::collections::HashSet;
use std::sync::LazyLock;

use serde::Serialize;

const KEPT_TAGS: &[&str] = &[
    "h1", "h2", "h3", "h4", "h5", "h6", "p", "br", "ul", "ol", "li", "dl", "dt", "dd", "table",
    "caption", "thead", "tbody", "tfoot", "tr", "th", "td", "pre", "blockquote", "em", "strong",
    "b", "i",
];

/// Elements dropped together with everything inside them.
const DROPPED_WITH_CONTENT: &[&str] = &[
    "script", "style", "title", "object", "embed", "applet", "iframe", "frame", "frameset",
    "noscript", "template", "svg", "math", "canvas", "video", "audio", "head", "select", "button",
    "textarea",
];

static CLEANER: LazyLock<ammonia::Builder<'static>> = LazyLock::new(|| {
    let mut b = ammonia::Builder::empty();
    b.tags(KEPT_TAGS.iter().copied().collect::<HashSet<_>>())
        .clean_content_tags(DROPPED_WITH_CONTENT.iter().copied().collect::<HashSet<_>>())
        .strip_comments(true)
        .link_rel(None);
    b
});

static TEXT_ONLY: LazyLock<ammonia::Builder<'static>> = LazyLock::new(|| {
    let mut b = ammonia::Builder::empty();
    b.clean_content_tags(DROPPED_WITH_CONTENT.iter().copied().collect::<HashSet<_>>());
    b
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CleanDocument {
    pub doc_id: String,
    /// Plain text.
    pub title: String,
    /// Markup restricted to headings, paragraphs, lists and tables, with no
    /// attributes.
    pub body: String,
    /// Length of the cleaned body in bytes.
    pub byte_size: usize,
    /// The input was not valid UTF-8; invalid sequences became U+FFFD.
    pub lossy: bool,
}

fn find_ascii_ci(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    (from..=h.len().checked_sub(n.len())?).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

fn raw_title(html: &str) -> Option<&str> {
    let open = find_ascii_ci(html, "<title", 0)?;
    let start = open + html[open..].find('>')? + 1;
    let end = find_ascii_ci(html, "</title", start)?;
    Some(&html[start..end])
}

/// Text content of cleaned markup, with the escapes it contains undone.
pub fn visible_text(markup: &str) -> String {
    let mut out = String::with_capacity(markup.len());
    let mut in_tag = false;
    for c in markup.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    unescape(&out)
}

fn unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&nbsp;", "\u{a0}")
        .replace("&amp;", "&")
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Cleans a crawled page. Any byte sequence is accepted.
///
/// Scripts, styles, embedded objects, frames and images are removed, every
/// attribute is stripped and only text-bearing structure survives, in
/// document order. Cleaning is deterministic and idempotent.
pub fn clean_document(doc_id: &str, raw: &[u8]) -> CleanDocument {
    let (text, lossy) = match String::from_utf8_lossy(raw) {
        Cow::Borrowed(s) => (Cow::Borrowed(s), false),
        Cow::Owned(s) => (Cow::Owned(s), true),
    };
    let title = raw_title(&text)
        .map(|t| collapse_whitespace(&visible_text(&TEXT_ONLY.clean(t).to_string())))
        .unwrap_or_default();
    let body = CLEANER.clean(&text).to_string();
    CleanDocument {
        doc_id: doc_id.to_string(),
        title,
        byte_size: body.len(),
        body,
        lossy,
    }
}

/// Character offsets of every case-insensitive occurrence of `query` in the
/// visible text of `markup`. Matches do not overlap. An empty query has no
/// matches.
pub fn search_offsets(markup: &str, query: &str) -> Vec<usize> {
    let fold = |s: &str| -> Vec<char> { s.chars().map(|c| c.to_lowercase().next().unwrap_or(c)).collect() };
    let text = fold(&visible_text(markup));
    let q = fold(query);
    if q.is_empty() || q.len() > text.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i + q.len() <= text.len() {
        if text[i..i + q.len()] == q[..] {
            out.push(i);
            i += q.len();
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_removed() {
        let d = clean_document("d", b"<p>hi</p><script>x()</script>");
        assert_eq!(d.body, "<p>hi</p>");
        assert!(!d.lossy);
    }

    #[test]
    fn plain_text_unchanged() {
        let d = clean_document("d", b"just some words here");
        assert_eq!(d.body, "just some words here");
    }

    #[test]
    fn nested_objects_removed_in_order() {
        let raw = br##"<div style="color:red">one <object data="x.swf"><embed src="x.swf">fallback</object> two <img src="i.png"> three</div><p bgcolor="#fff" align="center">four</p>"##;
        let d = clean_document("d", raw);
        assert_eq!(d.body, "one  two  three<p>four</p>");
    }

    #[test]
    fn title_and_head_handling() {
        let raw = b"<html><head><title>A &amp; B</title><style>p{}</style></head><body><h1 class=x>Head</h1></body></html>";
        let d = clean_document("d", raw);
        assert_eq!(d.title, "A & B");
        assert_eq!(d.body, "<h1>Head</h1>");
    }

    #[test]
    fn invalid_utf8_flagged() {
        let d = clean_document("d", b"<p>caf\xe9</p>");
        assert!(d.lossy);
        assert_eq!(d.body, "<p>caf\u{fffd}</p>");
    }

    #[test]
    fn idempotent() {
        let raw = b"<table><tr><td onclick=1>a<b>b</td></tr></table><ul><li>x &lt; y<li>z</ul><font color=red>q</font>";
        let once = clean_document("d", raw);
        let twice = clean_document("d", once.body.as_bytes());
        assert_eq!(once.body, twice.body);
    }

    #[test]
    fn search() {
        assert_eq!(search_offsets("<p>Hello hello</p><p>HELLO</p>", "hello"), vec![0, 6, 11]);
        assert_eq!(search_offsets("<p>a &amp; b</p>", "& b"), vec![2]);
        assert!(search_offsets("<p>x</p>", "").is_empty());
        assert_eq!(search_offsets("aaaa", "aa"), vec![0, 2]);
    }
}
