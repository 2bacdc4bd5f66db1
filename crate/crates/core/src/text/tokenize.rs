//! Comment tokenization shared by the corpus builder, the lexicon analysis
//! and the per-community feature metrics.

/// Structural features of one comment plus its lowercase word tokens.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenizedComment {
    /// Lowercased alphanumeric word tokens, mentions/hashtags/emoji removed.
    /// Stopwords are NOT removed here; the corpus builder does that.
    pub terms: Vec<String>,
    /// Whitespace tokens starting with '@'.
    pub mentions: usize,
    /// Whitespace tokens starting with '#'.
    pub hashtags: usize,
    /// Emoji codepoints anywhere in the text.
    pub emojis: usize,
    /// Whether any maximal alphabetic run of length >= 2 is all uppercase.
    pub has_uppercase_word: bool,
    /// Unicode scalar count of the raw text.
    pub chars: usize,
}

pub fn tokenize(text: &str) -> TokenizedComment {
    let mut out = TokenizedComment {
        chars: text.chars().count(),
        ..TokenizedComment::default()
    };

    for token in text.split_whitespace() {
        if token.starts_with('@') && token.chars().count() > 1 {
            out.mentions += 1;
            continue;
        }
        if token.starts_with('#') {
            out.hashtags += 1;
            continue;
        }
        // Maximal alphanumeric runs become word tokens.
        let mut current = String::new();
        for c in token.chars() {
            if c.is_alphanumeric() && !is_emoji_char(c) {
                current.extend(c.to_lowercase());
            } else if !current.is_empty() {
                out.terms.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            out.terms.push(current);
        }
    }

    out.emojis = text.chars().filter(|&c| is_emoji_char(c)).count();
    out.has_uppercase_word = has_uppercase_word(text);
    out
}

fn has_uppercase_word(text: &str) -> bool {
    let mut len = 0usize;
    let mut all_upper = true;
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_alphabetic() {
            len += 1;
            all_upper &= c.is_uppercase();
        } else {
            if len >= 2 && all_upper {
                return true;
            }
            len = 0;
            all_upper = true;
        }
    }
    false
}

/// Emoji test over the pictographic blocks. The table covers the ranges that
/// occur in social-media text; digits and keycap bases are deliberately out.
pub fn is_emoji_char(c: char) -> bool {
    matches!(u32::from(c),
        0x2600..=0x27BF          // miscellaneous symbols, dingbats
        | 0x2B00..=0x2BFF        // stars, geometric shapes
        | 0x1F000..=0x1F0FF      // mahjong, dominoes, cards
        | 0x1F1E6..=0x1F1FF      // regional indicators
        | 0x1F300..=0x1F5FF      // pictographs
        | 0x1F600..=0x1F64F      // emoticons
        | 0x1F680..=0x1F6FF      // transport
        | 0x1F700..=0x1F77F      // alchemical
        | 0x1F780..=0x1F7FF      // geometric extended
        | 0x1F800..=0x1F8FF      // supplemental arrows
        | 0x1F900..=0x1F9FF      // supplemental pictographs
        | 0x1FA00..=0x1FAFF      // extended pictographs
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_words_and_lowercases() {
        let t = tokenize("Bom dia Brasil");
        assert_eq!(t.terms, vec!["bom", "dia", "brasil"]);
    }

    #[test]
    fn classifies_mentions_and_hashtags() {
        let t = tokenize("Bom dia @joao #eleicao!");
        assert_eq!(t.terms, vec!["bom", "dia"]);
        assert_eq!(t.mentions, 1);
        assert_eq!(t.hashtags, 1);
    }

    #[test]
    fn empty_text_tokenizes_to_nothing() {
        let t = tokenize("");
        assert!(t.terms.is_empty());
        assert_eq!(t.chars, 0);
    }

    #[test]
    fn punctuation_only_tokens_disappear() {
        let t = tokenize("!!! ... ???");
        assert!(t.terms.is_empty());
    }

    #[test]
    fn emojis_are_stripped_and_counted() {
        let t = tokenize("boa noite \u{1F600}\u{1F680} pessoal \u{2764}");
        assert_eq!(t.terms, vec!["boa", "noite", "pessoal"]);
        assert_eq!(t.emojis, 3);
    }

    #[test]
    fn emoji_glued_to_word_still_splits() {
        let t = tokenize("top\u{1F600}demais");
        assert_eq!(t.terms, vec!["top", "demais"]);
        assert_eq!(t.emojis, 1);
    }

    #[test]
    fn digits_are_not_emojis() {
        assert!(!is_emoji_char('0'));
        assert!(!is_emoji_char('#'));
        assert!(is_emoji_char('\u{1F600}'));
        assert!(is_emoji_char('\u{2764}'));
    }

    #[test]
    fn uppercase_word_needs_two_letters() {
        assert!(tokenize("OLA pessoal").has_uppercase_word);
        assert!(tokenize("isso É GOLPE").has_uppercase_word);
        assert!(!tokenize("E ai pessoal").has_uppercase_word);
        assert!(!tokenize("Ola Pessoal").has_uppercase_word);
    }

    #[test]
    fn alphanumeric_tokens_keep_digits() {
        let t = tokenize("vote JB17 agora");
        assert_eq!(t.terms, vec!["vote", "jb17", "agora"]);
    }
}
