//! Tokenization and entity extraction shared by ingestion and analytics.

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_token_char(c: char) -> bool {
    is_word_char(c) || c == '#' || c == '@'
}

/// Splits `text` into lowercase tokens.
///
/// Tokens are maximal runs of letters, digits, `_`, `#` and `@`. Leading `#`/`@`
/// sigils are stripped and empty tokens dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, |tok| out.push(tok.to_owned()));
    out
}

/// Allocation-light variant of [`tokenize`]: calls `f` with each token in order.
pub fn for_each_token<F: FnMut(&str)>(text: &str, mut f: F) {
    let mut buf = String::with_capacity(32);
    for piece in text.split(|c: char| !is_token_char(c)) {
        let piece = piece.trim_start_matches(['#', '@']);
        if piece.is_empty() {
            continue;
        }
        buf.clear();
        if piece.is_ascii() {
            buf.push_str(piece);
            buf.make_ascii_lowercase();
        } else {
            buf.extend(piece.chars().flat_map(char::to_lowercase));
        }
        f(&buf);
    }
}

/// Extracts `sigil`-prefixed entities (`#tag`, `@handle`), lowercased, in order of
/// appearance. A sigil only starts an entity when it is not preceded by a word
/// character, so `a#b` and `me@example.org` yield nothing.
pub(crate) fn extract_entities(text: &str, sigil: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut prev: Option<char> = None;
    let mut chars = text.char_indices().peekable();
    while let Some((idx, c)) = chars.next() {
        let boundary = !prev.is_some_and(is_word_char);
        prev = Some(c);
        if c != sigil || !boundary {
            continue;
        }
        let start = idx + c.len_utf8();
        let mut end = start;
        while let Some(&(j, n)) = chars.peek() {
            if !is_word_char(n) {
                break;
            }
            end = j + n.len_utf8();
            prev = Some(n);
            chars.next();
        }
        if end > start {
            out.push(text[start..end].to_lowercase());
        }
    }
    out
}

pub(crate) fn extract_hashtags(text: &str) -> Vec<String> {
    extract_entities(text, '#')
}

pub(crate) fn extract_mentions(text: &str) -> Vec<String> {
    extract_entities(text, '@')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Stay SAFE, everyone!"), ["stay", "safe", "everyone"]);
        assert!(tokenize("").is_empty());
        assert_eq!(
            tokenize("#Measles @CityHealth update"),
            ["measles", "cityhealth", "update"]
        );
    }

    #[test]
    fn tokenize_keeps_inner_sigils_and_unicode() {
        assert_eq!(tokenize("a#b ##x @@y"), ["a#b", "x", "y"]);
        assert_eq!(tokenize("ÄRZTE warnen…Masern"), ["ärzte", "warnen", "masern"]);
        assert_eq!(tokenize("snake_case 42"), ["snake_case", "42"]);
        assert!(tokenize("# @ !!").is_empty());
    }

    #[test]
    fn hashtags_and_mentions() {
        let text = "Update #Measles via @CityHealth and @city_health2, see #MMR.";
        assert_eq!(extract_hashtags(text), ["measles", "mmr"]);
        assert_eq!(extract_mentions(text), ["cityhealth", "city_health2"]);
    }

    #[test]
    fn sigil_needs_boundary() {
        assert!(extract_hashtags("abc#def").is_empty());
        assert!(extract_mentions("mail me@example.org").is_empty());
        assert!(extract_hashtags("# alone").is_empty());
        assert_eq!(extract_hashtags("##double"), ["double"]);
        assert_eq!(extract_hashtags("(#paren)"), ["paren"]);
    }
}
