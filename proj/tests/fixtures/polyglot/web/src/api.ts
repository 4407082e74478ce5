import axios from "axios";
import { Priced } from "./types";

export class ApiClient {
  constructor(private base: string) {}

  async products(): Promise<Priced[]> {
    const res = await axios.get(this.base + "/products");
    return this.decode(res.data);
  }

  decode(raw: unknown): Priced[] {
    return raw as Priced[];
  }
}
