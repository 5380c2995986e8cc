// Text file formats: schema, event log, dataset.
//
// Schema:    `feature_id<TAB>name<TAB>kind` per line.
// Event log: header line, then one tab-separated line per result record:
//            day session_id query_id position product_id label f_0 .. f_{d-1}
// Dataset:   `# dataset kind=<ICE|ACE> d=<d> schema=<digest>` header, then
//            `grade group:<key> pid:<product_id> <fid>:<value> ...` per item,
//            items of one group contiguous, zero-valued features omitted.
//
// Reals are written in shortest round-trip form, so parse(write(x)) == x.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ace/core.hpp"

namespace ace::io {

std::string format_double(double value);
double parse_double(const std::string& text);

void write_schema(std::ostream& out, const FeatureSchema& schema);
FeatureSchema read_schema(std::istream& in);

void write_event_log(std::ostream& out, const FeatureSchema& schema,
                     const std::vector<SearchEvent>& events);
/// Records are grouped into events by consecutive (day, session_id).
std::vector<SearchEvent> read_event_log(std::istream& in,
                                        const FeatureSchema& schema);

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in, const FeatureSchema& schema);

// Path helpers. Each throws Error when the file cannot be opened.
void save_schema(const std::filesystem::path& path, const FeatureSchema& schema);
FeatureSchema load_schema(const std::filesystem::path& path);
void save_event_log(const std::filesystem::path& path, const FeatureSchema& schema,
                    const std::vector<SearchEvent>& events);
std::vector<SearchEvent> load_event_log(const std::filesystem::path& path,
                                        const FeatureSchema& schema);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace ace::io
