#pragma once

#include <string>

#include "evolvebm/paths.hpp"

namespace evolvebm {

// Shortest round-trip decimal representation of a double (std::to_chars).
std::string format_double(double x);

// CSV serialization. Headers: "t,x1..xd" (Path), "t,w1..wd" (ControlPath),
// "t,x1..xd,E11..Edd" row-major (FramePath). '.' decimal separator, ','
// field separator, LF line endings, shortest round-trip floats.
std::string path_to_csv(const Path& p);
std::string control_to_csv(const ControlPath& w);
std::string frames_to_csv(const FramePath& fp);

Path path_from_csv(const std::string& text);
ControlPath control_from_csv(const std::string& text);
FramePath frames_from_csv(const std::string& text);

// Whole-file helpers; IoError on failure. Writes go through a temp file in
// the target directory followed by an atomic rename.
std::string read_file(const std::string& path);
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace evolvebm
