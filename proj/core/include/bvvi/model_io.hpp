#pragma once

#include <filesystem>
#include <string>

#include "bvvi/model.hpp"

namespace bvvi {

/// Model files are JSON objects with integer "S","O","A","H" and nested
/// arrays "mu1"[S], "trans"[H][A][S][S], "emit"[H][S][O] (entry i is the
/// emission at step i+2) and "reward"[H][S][A].
TabularPomdp parse_model(const std::string& json_text);
std::string dump_model(const TabularPomdp& model);

/// Parses then validates. Throws ParseError or ValidationError.
TabularPomdp load_model(const std::filesystem::path& path);
void save_model(const TabularPomdp& model, const std::filesystem::path& path);

/// Policy files map "h:a,o,a,o,..." keys to action indices and must cover
/// every history of steps 1..H.
Policy parse_policy(const std::string& json_text, int A, int O, int H);
std::string dump_policy(const Policy& policy);
Policy load_policy(const std::filesystem::path& path, int A, int O, int H);
void save_policy(const Policy& policy, const std::filesystem::path& path);

}  // namespace bvvi
