#include "revive/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "revive/errors.hpp"

namespace revive::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'R', 'V', 'C', 'K'};

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string get_string(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw IoError("checkpoint: truncated data");
    }
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
    auto it = std::find_if(arrays.begin(), arrays.end(),
                           [&](const auto& entry) { return entry.first == name; });
    return it == arrays.end() ? nullptr : &it->second;
}

std::string encode_checkpoint(const Checkpoint& checkpoint) {
    std::string out(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, Checkpoint::kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.metadata.size()));
    out += checkpoint.metadata;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.arrays.size()));
    for (const auto& [name, tensor] : checkpoint.arrays) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        const Shape s = tensor.shape();
        for (std::size_t d : {s.n, s.c, s.h, s.w}) put<std::uint64_t>(out, d);
        for (double v : tensor.data()) put<double>(out, v);
    }
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    Reader in(bytes);
    if (in.get_string(4) != std::string(kMagic, 4)) throw IoError("checkpoint: bad magic");
    const auto version = in.get<std::uint32_t>();
    if (version != Checkpoint::kVersion) {
        throw IoError("checkpoint: unsupported version " + std::to_string(version));
    }
    Checkpoint ck;
    ck.metadata = in.get_string(in.get<std::uint32_t>());
    const auto count = in.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = in.get_string(in.get<std::uint32_t>());
        Shape s;
        s.n = in.get<std::uint64_t>();
        s.c = in.get<std::uint64_t>();
        s.h = in.get<std::uint64_t>();
        s.w = in.get<std::uint64_t>();
        if (s.numel() > (std::size_t{1} << 32)) throw IoError("checkpoint: implausible shape");
        std::vector<double> values(s.numel());
        for (double& v : values) v = in.get<double>();
        ck.arrays.emplace_back(std::move(name), Tensor(s, std::move(values)));
    }
    if (!in.done()) throw IoError("checkpoint: trailing bytes");
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot open '" + path.string() + "' for writing");
    const std::string bytes = encode_checkpoint(checkpoint);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("checkpoint: write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

void assign_parameters(const ParamList& params, const Checkpoint& checkpoint,
                       const std::string& prefix) {
    for (const auto& [name, tensor] : params) {
        const Tensor* src = checkpoint.find(prefix + name);
        if (src == nullptr) throw IoError("checkpoint: missing array '" + prefix + name + "'");
        if (src->shape() != tensor.shape()) {
            throw IoError("checkpoint: array '" + prefix + name + "' has shape " +
                          to_string(src->shape()) + ", expected " + to_string(tensor.shape()));
        }
        Tensor dst = tensor;
        std::ranges::copy(src->data(), dst.mutable_data().begin());
    }
}

}  // namespace revive::nn
