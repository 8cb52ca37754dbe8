def banner(text: str) -> None:
    print()
    print(f"== {text} ==")
