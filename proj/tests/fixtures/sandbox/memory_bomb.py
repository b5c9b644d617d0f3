data = bytearray(1024 * 1024 * 1024)
answer = len(data)
