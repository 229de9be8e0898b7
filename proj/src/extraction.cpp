#include "rulechain/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "rulechain/template.hpp"
#include "rulechain/text.hpp"

namespace rulechain {

namespace {

constexpr std::string_view kBullet = "\xE2\x80\xA2";  // U+2022

bool is_variable(std::string_view v) {
    return v == "A" || v == "B";
}

std::string_view strip_enumeration(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        ++i;
    }
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
        return s.substr(i + 1);
    }
    if (s.starts_with(kBullet)) {
        return s.substr(kBullet.size());
    }
    if (s.starts_with('-') || s.starts_with('*')) {
        return s.substr(1);
    }
    return s;
}

std::string strip_trailing_marks(std::string s) {
    while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == ';' || s.back() == ' ')) {
        s.pop_back();
    }
    return s;
}

std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '`') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

std::optional<Atom> make_atom(std::string_view subject, std::string_view middle,
                              std::string_view object) {
    if (!is_variable(subject) || !is_variable(object) || subject == object) {
        return std::nullopt;
    }
    try {
        return Atom(std::string(subject), std::string(middle), std::string(object));
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::optional<Atom> parse_line(std::string_view raw) {
    std::string line = trim(raw);
    line = trim(strip_enumeration(line));
    line = strip_quotes(strip_trailing_marks(collapse_whitespace(line)));
    line = strip_trailing_marks(trim(line));
    if (line.empty()) {
        return std::nullopt;
    }

    if (line.front() == '<') {
        auto first_close = line.find('>');
        auto last_open = line.rfind('<');
        if (first_close == std::string::npos || line.back() != '>' || last_open <= first_close) {
            return std::nullopt;
        }
        std::string subject = trim(std::string_view(line).substr(1, first_close - 1));
        std::string object =
            trim(std::string_view(line).substr(last_open + 1, line.size() - last_open - 2));
        std::string middle =
            trim(std::string_view(line).substr(first_close + 1, last_open - first_close - 1));
        return make_atom(subject, middle, object);
    }

    auto first_space = line.find(' ');
    auto last_space = line.rfind(' ');
    if (first_space == std::string::npos || last_space == first_space) {
        return std::nullopt;
    }
    std::string_view view(line);
    return make_atom(view.substr(0, first_space),
                     view.substr(first_space + 1, last_space - first_space - 1),
                     view.substr(last_space + 1));
}

const PromptTemplate& extraction_template() {
    static const PromptTemplate t(kExtractionTemplate);
    return t;
}

} // namespace

std::string render_extraction_prompt(std::string_view generated_text) {
    if (trim(generated_text).empty()) {
        throw invalid_input("extraction prompt: generated text is empty");
    }
    return extraction_template().render({{"text", std::string(generated_text)}});
}

CandidateSet parse_candidates(std::string_view model_output, std::string source_text) {
    CandidateSet set;
    set.source_text = std::move(source_text);
    std::unordered_set<std::string> seen;

    std::size_t start = 0;
    while (start <= model_output.size()) {
        auto end = model_output.find('\n', start);
        if (end == std::string_view::npos) {
            end = model_output.size();
        }
        auto line = model_output.substr(start, end - start);
        start = end + 1;

        if (trim(line).empty()) {
            continue;
        }
        ++set.diagnostics.lines_seen;
        auto atom = parse_line(line);
        if (!atom) {
            continue;
        }
        ++set.diagnostics.lines_parsed;
        if (!seen.insert(to_lower(atom->relation())).second) {
            ++set.diagnostics.duplicates_dropped;
            continue;
        }
        set.candidates.push_back(std::move(*atom));
    }
    return set;
}

std::string render_candidate_lines(const std::vector<Atom>& atoms) {
    std::string out;
    for (const auto& atom : atoms) {
        out += atom.prompt_form();
        out += '\n';
    }
    return out;
}

const StopwordSet& default_stopwords() {
    static const StopwordSet words{"is", "a",  "an", "the", "of", "to", "for",
                                   "by", "and", "or", "in",  "on", "'s"};
    return words;
}

StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read stopword file " + path);
    }
    StopwordSet words;
    std::string line;
    while (std::getline(in, line)) {
        auto word = to_lower(trim(line));
        if (!word.empty() && word.front() != '#') {
            words.insert(std::move(word));
        }
    }
    return words;
}

std::vector<std::string> content_tokens(std::string_view text, const StopwordSet& stopwords) {
    std::vector<std::string> out;
    auto push = [&](std::string token) {
        if (!token.empty() && !stopwords.contains(token)) {
            out.push_back(std::move(token));
        }
    };
    for (auto& token : tokenize(text)) {
        while (!token.empty() && (token.front() == '"' || token.front() == '(' ||
                                  token.front() == '\'')) {
            token.erase(token.begin());
        }
        while (!token.empty() && (token.back() == '"' || token.back() == ')')) {
            token.pop_back();
        }
        if (token.size() > 2 && token.ends_with("'s")) {
            push(token.substr(0, token.size() - 2));
            push("'s");
        } else {
            push(std::move(token));
        }
    }
    return out;
}

double relation_overlap(const Atom& atom, std::string_view source, const StopwordSet& stopwords) {
    auto relation = content_tokens(atom.relation(), stopwords);
    if (relation.empty()) {
        return 1.0;
    }
    auto source_tokens = content_tokens(source, stopwords);
    std::unordered_set<std::string> present(source_tokens.begin(), source_tokens.end());
    auto hits = std::count_if(relation.begin(), relation.end(),
                              [&](const std::string& t) { return present.contains(t); });
    return static_cast<double>(hits) / static_cast<double>(relation.size());
}

CandidateSet faithfulness_filter(const CandidateSet& set, double min_overlap,
                                 const StopwordSet& stopwords) {
    if (!(min_overlap >= 0.0 && min_overlap <= 1.0)) {
        throw invalid_input("faithfulness filter: min_overlap must lie in [0,1]");
    }
    CandidateSet kept;
    kept.source_text = set.source_text;
    kept.diagnostics = set.diagnostics;
    for (const auto& atom : set.candidates) {
        if (relation_overlap(atom, set.source_text, stopwords) >= min_overlap) {
            kept.candidates.push_back(atom);
        } else {
            ++kept.diagnostics.unfaithful_dropped;
        }
    }
    return kept;
}

} // namespace rulechain
