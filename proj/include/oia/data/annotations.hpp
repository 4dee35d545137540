#pragma once
// Tab-separated annotation lines: scene_id <TAB> 4-char action mask <TAB> 21-char explanation mask.

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "oia/errors.hpp"
#include "oia/objectives/labels.hpp"

namespace oia {

struct Annotation {
    std::string scene_id;
    ActionLabel action;
    ExplanationLabel explanation;

    bool operator==(const Annotation&) const = default;
};

class AnnotationError : public DataError {
public:
    AnnotationError(const std::string& source, std::size_t line, const std::string& detail)
        : DataError(source + ":" + std::to_string(line) + ": " + detail), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Blank lines are ignored. A trailing '\r' is stripped.
std::vector<Annotation> parse_annotations(std::istream& in, const std::string& source = "<stream>");
std::vector<Annotation> load_annotations(const std::filesystem::path& path);

std::string format_annotation(const Annotation& a);
void save_annotations(const std::filesystem::path& path, std::span<const Annotation> records);

}  // namespace oia
