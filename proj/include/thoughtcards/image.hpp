#pragma once

#include "thoughtcards/core.hpp"

#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

namespace thoughtcards {

inline std::string base64_encode(std::string_view bytes) {
    static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) | static_cast<unsigned char>(bytes[i + 2]);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (const std::size_t rest = bytes.size() - i; rest != 0) {
        unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        if (rest == 2) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

inline std::string mime_type_for(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return "image/png";
}

/// Base64 form of the payload; files are read from disk on every call.
inline std::string image_base64(const ImagePayload& image) {
    if (const auto* inline_image = std::get_if<InlineImage>(&image)) return inline_image->base64;
    const auto& path = std::get<ImageFile>(image).path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read image file '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return base64_encode(bytes);
}

inline std::string image_data_url(const ImagePayload& image) {
    std::string mime = std::holds_alternative<InlineImage>(image) ? std::get<InlineImage>(image).mime_type
                                                                  : mime_type_for(std::get<ImageFile>(image).path);
    return "data:" + mime + ";base64," + image_base64(image);
}

}  // namespace thoughtcards
