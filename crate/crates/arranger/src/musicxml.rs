//! Minimal MusicXML 3.1 partwise export, one-way, for inspecting scores
//! in notation software. Measures are 8 beats; divisions equal the
//! score's ticks per beat; pitches are spelled with sharps.

use std::fmt::Write;

use crate::score::{Note, Pitch, Score};

const STEPS: [(&str, i32); 12] = [
    ("C", 0),
    ("C", 1),
    ("D", 0),
    ("D", 1),
    ("E", 0),
    ("F", 0),
    ("F", 1),
    ("G", 0),
    ("G", 1),
    ("A", 0),
    ("A", 1),
    ("B", 0),
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn write_pitch(out: &mut String, pitch: Pitch, indent: &str) {
    let semitone = pitch.semitone() as i32;
    let (step, alter) = STEPS[(semitone % 12) as usize];
    let octave = semitone / 12 - 1;
    let _ = writeln!(out, "{indent}<pitch>");
    let _ = writeln!(out, "{indent}  <step>{step}</step>");
    if alter != 0 {
        let _ = writeln!(out, "{indent}  <alter>{alter}</alter>");
    }
    let _ = writeln!(out, "{indent}  <octave>{octave}</octave>");
    let _ = writeln!(out, "{indent}</pitch>");
}

fn write_rest(out: &mut String, duration: u64) {
    let _ = writeln!(out, "        <note>");
    let _ = writeln!(out, "          <rest/>");
    let _ = writeln!(out, "          <duration>{duration}</duration>");
    let _ = writeln!(out, "        </note>");
}

fn write_note(out: &mut String, pitch: Pitch, duration: u64, tie: Option<&str>) {
    let _ = writeln!(out, "        <note>");
    write_pitch(out, pitch, "          ");
    let _ = writeln!(out, "          <duration>{duration}</duration>");
    if let Some(kind) = tie {
        let _ = writeln!(out, "          <tie type=\"{kind}\"/>");
    }
    let _ = writeln!(out, "        </note>");
}

/// A note clipped to one measure, remembering whether it continues.
struct Slice {
    onset: u64,
    end: u64,
    pitch: Pitch,
    tie: Option<&'static str>,
}

fn slices_in_measure(note: &Note, m_start: u64, m_end: u64) -> Option<Slice> {
    if note.end() <= m_start || note.onset >= m_end {
        return None;
    }
    let onset = note.onset.max(m_start);
    let end = note.end().min(m_end);
    let tie = match (note.onset < m_start, note.end() > m_end) {
        (false, false) => None,
        (false, true) => Some("start"),
        (true, false) => Some("stop"),
        (true, true) => Some("start"), // middle of a long note
    };
    Some(Slice {
        onset,
        end,
        pitch: note.pitch,
        tie,
    })
}

/// Renders the score as a MusicXML 3.1 partwise document. Notes are
/// split at measure boundaries with ties; overlaps within a part are
/// positioned with `<backup>`; gaps become rests.
pub fn export_musicxml(score: &Score) -> String {
    let measure_ticks = 8 * score.ticks_per_beat as u64;
    let last_tick = score
        .parts
        .iter()
        .flat_map(|p| p.notes.iter().map(Note::end))
        .max()
        .unwrap_or(0);
    let num_measures = (last_tick.div_ceil(measure_ticks)).max(1);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<!DOCTYPE score-partwise PUBLIC \"-//Recordare//DTD MusicXML 3.1 Partwise//EN\" \
         \"http://www.musicxml.org/dtds/partwise.dtd\">\n",
    );
    out.push_str("<score-partwise version=\"3.1\">\n");
    out.push_str("  <part-list>\n");
    for (pi, part) in score.parts.iter().enumerate() {
        let _ = writeln!(out, "    <score-part id=\"P{}\">", pi + 1);
        let _ = writeln!(
            out,
            "      <part-name>{}</part-name>",
            xml_escape(&part.id)
        );
        out.push_str("    </score-part>\n");
    }
    out.push_str("  </part-list>\n");

    for (pi, part) in score.parts.iter().enumerate() {
        let _ = writeln!(out, "  <part id=\"P{}\">", pi + 1);
        for m in 0..num_measures {
            let m_start = m * measure_ticks;
            let m_end = m_start + measure_ticks;
            let _ = writeln!(out, "    <measure number=\"{}\">", m + 1);
            if m == 0 {
                let _ = writeln!(out, "      <attributes>");
                let _ = writeln!(
                    out,
                    "        <divisions>{}</divisions>",
                    score.ticks_per_beat
                );
                out.push_str("        <time>\n          <beats>8</beats>\n          <beat-type>4</beat-type>\n        </time>\n");
                out.push_str("        <clef>\n          <sign>G</sign>\n          <line>2</line>\n        </clef>\n");
                let _ = writeln!(out, "      </attributes>");
            }
            let mut cursor = m_start;
            for note in &part.notes {
                let Some(slice) = slices_in_measure(note, m_start, m_end) else {
                    continue;
                };
                if slice.onset > cursor {
                    write_rest(&mut out, slice.onset - cursor);
                } else if slice.onset < cursor {
                    let _ = writeln!(out, "        <backup>");
                    let _ = writeln!(out, "          <duration>{}</duration>", cursor - slice.onset);
                    let _ = writeln!(out, "        </backup>");
                }
                write_note(&mut out, slice.pitch, slice.end - slice.onset, slice.tie);
                cursor = slice.end;
            }
            if cursor < m_end {
                write_rest(&mut out, m_end - cursor);
            }
            out.push_str("    </measure>\n");
        }
        out.push_str("  </part>\n");
    }
    out.push_str("</score-partwise>\n");
    out
}
