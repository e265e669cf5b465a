/*
 * Copyright 2026 The Linker Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LINKER_HASHING_HPP_
#define LINKER_HASHING_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace linker {

std::array<std::uint8_t, 32> sha256(std::string_view bytes);
std::string to_hex(const std::uint8_t* data, std::size_t size);
std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace linker

#endif  // LINKER_HASHING_HPP_
