//! Text normalisation shared by the matching code.

use unicode_normalization::UnicodeNormalization;

/// Canonical composition (NFC).
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Case folding that conflates the four Turkish i variants (`I`, `ı`, `İ`,
/// `i`) into plain `i` before lowercasing everything else.
///
/// Plain `to_lowercase` maps `İ` to `i` + U+0307 and leaves `ı` distinct from
/// `i`, so the same word typed on Turkish and non-Turkish keyboards would not
/// compare equal.
pub fn fold_turkish(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.nfc() {
        match c {
            'I' | 'ı' | 'İ' => out.push('i'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

/// Usernames are ASCII by platform rules.
pub fn fold_ascii(s: &str) -> String {
    s.to_ascii_lowercase()
}

#[inline]
pub fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Extracts `@handle` mentions from whitespace tokens, returning handles
/// without the `@`, folded to ASCII lowercase. Trailing punctuation after
/// the handle (`@user:`) is not part of the handle.
pub fn scan_mentions(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|tok| {
            let rest = tok.strip_prefix('@')?;
            let handle: String = rest.chars().take_while(|c| is_word_char(*c)).collect();
            (!handle.is_empty()).then(|| fold_ascii(&handle))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turkish_i_variants_fold_together() {
        assert_eq!(fold_turkish("RT HESABI"), "rt hesabi");
        assert_eq!(fold_turkish("rt hesabı"), "rt hesabi");
        assert_eq!(fold_turkish("İSTANBUL"), "istanbul");
        assert_eq!(fold_turkish("MAIN ACCOUNT"), "main account");
    }

    #[test]
    fn nfc_composes() {
        assert_eq!(nfc("Erdog\u{0306}an"), "Erdoğan");
        assert_eq!(fold_turkish("ERDOG\u{0306}AN"), "erdoğan");
    }

    #[test]
    fn mentions_strip_trailing_punctuation() {
        assert_eq!(scan_mentions("RT @Foo_1: hi @bar, @ x @"), vec!["foo_1", "bar"]);
    }
}
