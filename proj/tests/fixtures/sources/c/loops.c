#include <stdio.h>

long sum_grid(int n) {
    long total = 0;
    for (int i = 0; i < n; i++) {
        int j = 0;
        while (j < n) {
            total += (long)i * j;
            j++;
        }
    }
    return total;
}

int main(void) {
    printf("%ld\n", sum_grid(64));
    return 0;
}
