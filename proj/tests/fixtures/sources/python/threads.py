import threading


def worker(rounds):
    total = 0
    for i in range(rounds):
        total += i % 5
    return total


def main():
    threads = [threading.Thread(target=worker, args=(20000,)) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


if __name__ == "__main__":
    main()
