//! GraphML and edge-list exports.

use std::io::{self, Write};

use super::InteractionGraph;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn write_graphml<W: Write>(graph: &InteractionGraph, mut out: W) -> io::Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    let keys = [
        ("corpus", "node", "string"),
        ("suspension_status", "node", "string"),
        ("explicit", "node", "string"),
        ("mention", "edge", "long"),
        ("retweet", "edge", "long"),
        ("reply", "edge", "long"),
        ("quote", "edge", "long"),
        ("weight", "edge", "long"),
    ];
    for (name, domain, ty) in keys {
        writeln!(out, r#"  <key id="{name}" for="{domain}" attr.name="{name}" attr.type="{ty}"/>"#)?;
    }
    writeln!(out, r#"  <graph id="interactions" edgedefault="directed">"#)?;
    for node in graph.nodes() {
        let explicit = match node.explicit {
            Some(true) => "true",
            Some(false) => "false",
            None => "unknown",
        };
        writeln!(out, r#"    <node id="{}">"#, escape(&node.user_id))?;
        writeln!(out, r#"      <data key="corpus">{}</data>"#, node.corpus)?;
        writeln!(out, r#"      <data key="suspension_status">{}</data>"#, node.suspension_status)?;
        writeln!(out, r#"      <data key="explicit">{explicit}</data>"#)?;
        writeln!(out, "    </node>")?;
    }
    for (s, t, c) in graph.edges() {
        writeln!(out, r#"    <edge source="{}" target="{}">"#, escape(s), escape(t))?;
        for (key, v) in [
            ("mention", c.mention),
            ("retweet", c.retweet),
            ("reply", c.reply),
            ("quote", c.quote),
            ("weight", c.weight()),
        ] {
            writeln!(out, r#"      <data key="{key}">{v}</data>"#)?;
        }
        writeln!(out, "    </edge>")?;
    }
    writeln!(out, "  </graph>")?;
    writeln!(out, "</graphml>")?;
    Ok(())
}

pub fn write_edge_list_csv<W: Write>(graph: &InteractionGraph, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "mention", "retweet", "reply", "quote", "weight"])?;
    for (s, t, c) in graph.edges() {
        w.write_record([
            s.to_string(),
            t.to_string(),
            c.mention.to_string(),
            c.retweet.to_string(),
            c.reply.to_string(),
            c.quote.to_string(),
            c.weight().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::graph;

    #[test]
    fn graphml_lists_every_node_and_edge() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let mut buf = Vec::new();
        write_graphml(&g, &mut buf).unwrap();
        let xml = String::from_utf8(buf).unwrap();
        assert_eq!(xml.matches("<node ").count(), 3);
        assert_eq!(xml.matches("<edge ").count(), 2);
        assert!(xml.contains(r#"<edge source="n00" target="n01">"#));
        assert!(xml.contains(r#"<data key="weight">1</data>"#));
        assert_eq!(escape(r#"a<&>"'"#), "a&lt;&amp;&gt;&quot;&apos;");
    }

    #[test]
    fn edge_list() {
        let g = graph(2, &[(1, 0)]);
        let mut buf = Vec::new();
        write_edge_list_csv(&g, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "source,target,mention,retweet,reply,quote,weight\nn01,n00,1,0,0,0,1\n"
        );
    }
}
