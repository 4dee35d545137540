#include "oia/data/annotations.hpp"

#include <fstream>
#include <unordered_set>

namespace oia {

std::vector<Annotation> parse_annotations(std::istream& in, const std::string& source) {
    std::vector<Annotation> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
            throw AnnotationError(source, lineno, "expected 3 tab-separated fields");
        }
        Annotation a;
        a.scene_id = line.substr(0, t1);
        if (a.scene_id.empty()) throw AnnotationError(source, lineno, "empty scene id");
        try {
            a.action = ActionLabel::from_mask(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
        } catch (const std::invalid_argument& e) {
            throw AnnotationError(source, lineno, std::string("action ") + e.what());
        }
        try {
            a.explanation = ExplanationLabel::from_mask(std::string_view(line).substr(t2 + 1));
        } catch (const std::invalid_argument& e) {
            throw AnnotationError(source, lineno, std::string("explanation ") + e.what());
        }
        if (!seen.insert(a.scene_id).second) {
            throw AnnotationError(source, lineno, "duplicate scene id '" + a.scene_id + "'");
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotation file " + path.string());
    return parse_annotations(in, path.string());
}

std::string format_annotation(const Annotation& a) {
    return a.scene_id + '\t' + a.action.mask() + '\t' + a.explanation.mask();
}

void save_annotations(const std::filesystem::path& path, std::span<const Annotation> records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write annotation file " + path.string());
    for (const Annotation& a : records) out << format_annotation(a) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace oia
