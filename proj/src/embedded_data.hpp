#pragma once

#include <string_view>

// Data tables compiled into the library from data/.
namespace hatepipe::embedded {

std::string_view emoji_table();
std::string_view folding_table();
std::string_view english_stopwords();
std::string_view contractions();

}  // namespace hatepipe::embedded
