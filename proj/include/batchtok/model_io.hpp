#pragma once

#include <iosfwd>
#include <string>

#include "batchtok/model.hpp"

namespace batchtok {

// Versioned text model file:
//
//   batchtok model v1
//   pattern <name> "<regex source>"
//   stops <count>
//   "<stop chunk>"          one per line, token id order
//   <first> <last>          one merge per line, rank order; new ids are
//                           implicit from position
//
// Quoted strings use \\ \" \n \r \t and \xHH escapes; everything else is
// written raw. Serialization is canonical, so save -> load -> save is byte
// identical.
void save_model(const TokenizerModel& model, std::ostream& out);
void save_model(const TokenizerModel& model, const std::string& path);

// Rejects unknown versions before reading the body; malformed lines and
// merges referencing undefined or stop tokens raise ParseError with the
// offending line number.
TokenizerModel load_model(std::istream& in);
TokenizerModel load_model(const std::string& path);

}  // namespace batchtok
