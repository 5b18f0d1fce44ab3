#pragma once

#include <string>
#include <string_view>
#include <vector>

// Word lists shipped under data/ and compiled into the library.
namespace ohc::resources {

std::string_view stopwords();      // one token per line
std::string_view abbreviations();  // one lowercase abbreviation per line, with its period
std::string_view gazetteer();      // surface form TAB entity class
std::string_view emoticons();      // emoticon TAB code

/// Non-empty, non-comment lines of a resource text.
std::vector<std::string> lines(std::string_view text);

}  // namespace ohc::resources
