#include <cstdio>
#include <stdexcept>
#include <string>

std::string render(int code) {
    if (code < 0)
        throw std::invalid_argument("negative code");
    return "code-" + std::to_string(code);
}

int safe_render(int code) {
    try {
        return static_cast<int>(render(code).size());
    } catch (const std::invalid_argument&) {
        return -1;
    }
}

int main() {
    std::printf("%d %d\n", safe_render(42), safe_render(-1));
    return 0;
}
