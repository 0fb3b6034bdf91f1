#pragma once

#include <string>
#include <string_view>

namespace skillrel {

// Porter suffix-stripping stemmer over lowercase words. Follows the
// reference implementation (including its bli->ble and logi->log
// departures) with one extension: step 4 also strips bare "enc"/"anc"
// under the same m>1 condition, so -ed forms of -ence/-ance words land on
// the same stem as their base (experienced -> experi == experience).
std::string porter_stem(std::string_view word);

}  // namespace skillrel
