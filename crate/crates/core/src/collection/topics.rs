use std::collections::BTreeSet;

use quick_xml::escape::{escape, resolve_predefined_entity};
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

use crate::{Error, Result};

/// An information need. The title is used verbatim as the query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: String,
    pub title: String,
    pub relevance_levels: Vec<RelevanceLevel>,
}

/// One entry of a topic's relevance description, stored as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceLevel {
    pub value: i32,
    pub description: String,
}

#[derive(Default)]
struct TopicBuilder {
    id: String,
    line: usize,
    title: Option<String>,
    levels: Vec<RelevanceLevel>,
}

enum Capture {
    Title,
    Level(i32),
}

fn line_of(input: &str, offset: u64) -> usize {
    let offset = (offset as usize).min(input.len());
    input.as_bytes()[..offset]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

fn attribute(
    input: &str,
    reader: &Reader<&[u8]>,
    element: &BytesStart<'_>,
    name: &str,
) -> Result<Option<String>> {
    let line = || line_of(input, reader.buffer_position());
    match element.try_get_attribute(name) {
        Ok(Some(attr)) => attr
            .normalized_value(XmlVersion::Implicit1_0)
            .map(|v| Some(v.into_owned()))
            .map_err(|e| Error::parse(line(), e.to_string())),
        Ok(None) => Ok(None),
        Err(e) => Err(Error::parse(line(), e.to_string())),
    }
}

/// Parses a topics file: a sequence of `<topic>` elements, optionally
/// wrapped in a `<topics>` root. Unknown elements are ignored.
pub fn parse_topics(input: &str) -> Result<Vec<Topic>> {
    let mut reader = Reader::from_str(input);
    let mut stack: Vec<String> = Vec::new();
    let mut current: Option<TopicBuilder> = None;
    let mut capture: Option<(Capture, String)> = None;
    let mut topics: Vec<Topic> = Vec::new();
    let mut seen = BTreeSet::new();

    loop {
        let event = reader
            .read_event()
            .map_err(|e| Error::parse(line_of(input, reader.error_position()), e.to_string()))?;
        let line = line_of(input, reader.buffer_position());
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = e.name().as_ref().to_string();
                match name.as_str() {
                    "topic" => {
                        if current.is_some() {
                            return Err(Error::parse(line, "nested <topic> element"));
                        }
                        let id = attribute(input, &reader, e, "id")?
                            .ok_or_else(|| Error::parse(line, "<topic> without id attribute"))?;
                        current = Some(TopicBuilder {
                            id,
                            line,
                            ..Default::default()
                        });
                    }
                    "title" if current.is_some() => capture = Some((Capture::Title, String::new())),
                    "level" if current.is_some() => {
                        let raw = attribute(input, &reader, e, "value")?
                            .ok_or_else(|| Error::parse(line, "<level> without value attribute"))?;
                        let value: i32 = raw.trim().parse().map_err(|_| {
                            Error::parse(line, format!("level value {raw:?} is not an integer"))
                        })?;
                        capture = Some((Capture::Level(value), String::new()));
                    }
                    _ => {}
                }
                if is_empty {
                    close_element(&name, line, &mut current, &mut capture, &mut topics, &mut seen)?;
                } else {
                    stack.push(name);
                }
            }
            Event::End(e) => {
                let name = e.name().as_ref().to_string();
                stack.pop();
                close_element(&name, line, &mut current, &mut capture, &mut topics, &mut seen)?;
            }
            Event::Text(t) => {
                if let Some((_, buf)) = capture.as_mut() {
                    buf.push_str(&t.xml10_content());
                }
            }
            Event::CData(t) => {
                if let Some((_, buf)) = capture.as_mut() {
                    buf.push_str(&t.xml10_content());
                }
            }
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref() {
                    Ok(Some(c)) => c.to_string(),
                    Ok(None) => {
                        let name = r.xml10_content();
                        resolve_predefined_entity(&name)
                            .map(str::to_string)
                            .ok_or_else(|| Error::parse(line, format!("unknown entity &{name};")))?
                    }
                    Err(e) => return Err(Error::parse(line, e.to_string())),
                };
                if let Some((_, buf)) = capture.as_mut() {
                    buf.push_str(&resolved);
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }

    if let Some(open) = stack.last() {
        return Err(Error::parse(
            line_of(input, input.len() as u64),
            format!("unclosed element <{open}>"),
        ));
    }
    Ok(topics)
}

fn close_element(
    name: &str,
    line: usize,
    current: &mut Option<TopicBuilder>,
    capture: &mut Option<(Capture, String)>,
    topics: &mut Vec<Topic>,
    seen: &mut BTreeSet<String>,
) -> Result<()> {
    match name {
        "title" | "level" => {
            if let (Some(topic), Some((kind, text))) = (current.as_mut(), capture.take()) {
                let text = text.trim().to_string();
                match kind {
                    Capture::Title => topic.title = Some(text),
                    Capture::Level(value) => topic.levels.push(RelevanceLevel {
                        value,
                        description: text,
                    }),
                }
            }
        }
        "topic" => {
            let Some(builder) = current.take() else {
                return Ok(());
            };
            if builder.id.trim().is_empty() {
                return Err(Error::validation(format!(
                    "topic at line {} has an empty id",
                    builder.line
                )));
            }
            let title = builder.title.unwrap_or_default();
            if title.is_empty() {
                return Err(Error::validation(format!(
                    "topic {} has an empty or missing title",
                    builder.id
                )));
            }
            if !seen.insert(builder.id.clone()) {
                return Err(Error::validation(format!(
                    "duplicate topic id {} at line {line}",
                    builder.id
                )));
            }
            topics.push(Topic {
                id: builder.id,
                title,
                relevance_levels: builder.levels,
            });
        }
        _ => {}
    }
    Ok(())
}

pub fn write_topics(topics: &[Topic]) -> String {
    let mut out = String::from("<topics>\n");
    for topic in topics {
        out.push_str(&format!("<topic id=\"{}\">\n", escape(topic.id.as_str())));
        out.push_str(&format!("<title>{}</title>\n", escape(topic.title.as_str())));
        out.push_str("<relevance>\n");
        for level in &topic.relevance_levels {
            out.push_str(&format!(
                "<level value=\"{}\">{}</level>\n",
                level.value,
                escape(level.description.as_str())
            ));
        }
        out.push_str("</relevance>\n</topic>\n");
    }
    out.push_str("</topics>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"<topic id="2010-019">
<title>Where are Google’s data-centers located?</title>
<relevance>
<level value="2">The document is not related to the topic. It may contain some common terms, but still not related
to the topic.</level>
<level value="1">The document is related to the topic, but does not satisfy the information need. It may contain a
hyperlink to a relevant document.</level>
<level value="0">The document is related to the topic and does satisfy the information need.</level>
</relevance>
</topic>
"#;

    #[test]
    fn parses_sample_topic() {
        let topics = parse_topics(SAMPLE).unwrap();
        assert_eq!(topics.len(), 1);
        let t = &topics[0];
        assert_eq!(t.id, "2010-019");
        assert_eq!(t.title, "Where are Google’s data-centers located?");
        assert_eq!(t.relevance_levels.len(), 3);
        assert_eq!(t.relevance_levels[0].value, 2);
        assert!(t.relevance_levels[0]
            .description
            .starts_with("The document is not related"));
        assert_eq!(t.relevance_levels[2].value, 0);
    }

    #[test]
    fn empty_root_yields_no_topics() {
        assert!(parse_topics("<topics/>").unwrap().is_empty());
        assert!(parse_topics("<topics></topics>").unwrap().is_empty());
        assert!(parse_topics("").unwrap().is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let doc = r#"<topics><topic id="a"><title>x</title></topic><topic id="a"><title>y</title></topic></topics>"#;
        assert!(matches!(parse_topics(doc), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_markup_reports_line() {
        let doc = "<topics>\n<topic id=\"a\">\n<title>x</titel>\n</topic>\n</topics>";
        match parse_topics(doc) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_topics("<topics>\n<topic id=\"a\">\n<title>x</title>\n") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("unclosed")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_title_rejected() {
        assert!(parse_topics(r#"<topic id="a"></topic>"#).is_err());
        assert!(parse_topics(r#"<topic id=""><title>t</title></topic>"#).is_err());
    }

    #[test]
    fn entities_are_decoded() {
        let topics =
            parse_topics(r#"<topic id="x"><title>AT&amp;T &#233;</title></topic>"#).unwrap();
        assert_eq!(topics[0].title, "AT&T é");
    }

    #[test]
    fn writer_round_trips() {
        let topics = parse_topics(SAMPLE).unwrap();
        assert_eq!(parse_topics(&write_topics(&topics)).unwrap(), topics);
    }
}
